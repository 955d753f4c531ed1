import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from quatpsh import forms
from quatpsh.corpus import random_form, random_point, random_poly, random_real_2form
from quatpsh.fields import ddj_potential, parse_field
from quatpsh.forms import (
    Form,
    FormSyntaxError,
    StructureAction,
    conj_form,
    d,
    d_ci,
    del_,
    del_J,
    delbar,
    dz,
    dzbar,
    evaluate_multilinear,
    is_real,
    parse_form,
    pullback,
    t_inv,
    t_map,
    top_ratio,
    volume_form,
    wedge,
    wedge_all,
)
from quatpsh.hherm import HyperhermitianMatrix, mixed_det, random_hyperhermitian
from quatpsh.poly import Poly
from quatpsh.quat import Quaternion, QuaternionMatrix, right_action_matrix
from quatpsh.scalars import CQ

from conftest import rng_from, seeds

BIDEGREES = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1), (2, 2)]


def corpus_form(seed, n, bideg):
    p, q = bideg
    return random_form(rng_from(seed), n, p, q, max_degree=3)


# algebra -------------------------------------------------------------------------


def test_wedge_examples():
    assert wedge(dz(1, 1), dz(1, 1)).is_zero()
    assert wedge(dz(1, 1), dz(1, 2)) == Form.word(1, (0, 1))
    assert wedge(dz(1, 2), dz(1, 1)) == -Form.word(1, (0, 1))
    w = parse_form("dz1^dz2 + dz3^dz4", 2)
    assert w**2 == 2 * parse_form("dz1^dz2^dz3^dz4", 2)


@given(seeds, st.integers(1, 2))
def test_wedge_of_covectors_is_a_determinant(seed, n):
    rng = rng_from(seed)
    letters = rng.sample(range(4 * n), 2)
    vecs = [random_point(rng, 4 * n) for _ in range(2)]
    a, b = (Form.letter(n, l) for l in letters)
    ea = [evaluate_multilinear(a, [v]) for v in vecs]
    eb = [evaluate_multilinear(b, [v]) for v in vecs]
    assert evaluate_multilinear(wedge(a, b), vecs) == ea[0] * eb[1] - ea[1] * eb[0]


@given(seeds)
def test_wedge_associative_and_graded(seed):
    rng = rng_from(seed)
    a, b, c = (random_form(rng, 1, p, q, max_degree=1, words=2) for p, q in [(1, 0), (0, 1), (1, 1)])
    assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))
    assert wedge(a, b) == -wedge(b, a)
    assert wedge(a, c) == wedge(c, a)


# derivatives -----------------------------------------------------------------------


def test_del_examples():
    z1 = parse_form("t1 + i*x1", 1)
    assert del_(z1) == dz(1, 1)
    assert delbar(z1).is_zero()
    assert del_(parse_form("t1", 1)) == dz(1, 1).scale(Fraction(1, 2))
    assert d(parse_form("t1", 1)) == (dz(1, 1) + dzbar(1, 1)).scale(Fraction(1, 2))
    assert d_ci(parse_form("3", 1), "I").is_zero()


def test_second_coordinate_is_holomorphic():
    assert delbar(parse_form("y1 - i*z1", 1)).is_zero()
    assert del_(parse_form("y1 - i*z1", 1)) == dz(1, 2)


@given(seeds, st.integers(1, 2))
def test_d_matches_partial_derivatives(seed, n):
    rng = rng_from(seed)
    p = random_poly(rng, 4 * n, max_degree=3)
    point = random_point(rng, 4 * n)
    df = d(Form.scalar(n, p)).at(point)
    for m in range(4 * n):
        e = [0] * (4 * n)
        e[m] = 1
        assert evaluate_multilinear(df, [e]) == CQ.coerce(p.diff(m).evaluate(point))


def test_del_j_examples():
    assert del_J(parse_form("t1 - i*x1", 1)) == dz(1, 2)
    assert del_J(parse_form("t1 + i*x1", 1)).is_zero()
    assert ddj_potential(parse_field("t1^2 + x1^2 + y1^2 + z1^2")) == 2 * parse_form("dz1^dz2", 1)
    assert ddj_potential(parse_field("t1^2", 1)) == parse_form("1/2*dz1^dz2", 1)
    assert ddj_potential(parse_field("5", 1)).is_zero()


@pytest.mark.parametrize("bideg", BIDEGREES)
@pytest.mark.parametrize("n", [1, 2])
def test_operator_identities(bideg, n):
    for seed in range(3):
        w = corpus_form(seed, n, bideg)
        assert del_(del_(w)).is_zero()
        assert delbar(delbar(w)).is_zero()
        assert del_(delbar(w)) == -delbar(del_(w))
        assert del_(del_J(w)) == -del_J(del_(w))
        assert d(w) == del_(w) + delbar(w)


@given(seeds, st.sampled_from(BIDEGREES[:5]))
def test_del_j_raises_holomorphic_degree(seed, bideg):
    w = corpus_form(seed, 1, bideg)
    image = del_J(w)
    assert image.is_zero() or image.has_bidegree(bideg[0] + 1, bideg[1])


@given(seeds, st.integers(1, 2))
def test_structure_differentials_anticommute(seed, n):
    w = corpus_form(seed, n, (1, 0))
    names = (None, "I", "J", "K")
    for a, b in itertools.combinations(names, 2):
        assert (d_ci(d_ci(w, a), b) + d_ci(d_ci(w, b), a)).is_zero()


# structure actions ----------------------------------------------------------------------


@pytest.mark.parametrize("which, unit", [("I", Quaternion(0, 1)), ("J", Quaternion(0, 0, 1)), ("K", Quaternion(0, 0, 0, 1))])
@pytest.mark.parametrize("n", [1, 2])
def test_action_is_pullback_along_right_multiplication(which, unit, n):
    rl = right_action_matrix(unit, n).rows
    rng = rng_from(11)
    for letter in range(4 * n):
        omega = Form.letter(n, letter)
        image = forms.act(omega, which)
        for _ in range(3):
            v = random_point(rng, 4 * n)
            vl = [sum(rl[r][c] * v[c] for c in range(4 * n)) for r in range(4 * n)]
            assert evaluate_multilinear(image, [v]) == evaluate_multilinear(omega, [vl])
        assert image == StructureAction(n).letter_image(which, letter)


def test_j_on_letters():
    assert forms.j_act(dzbar(1, 1)) == -dz(1, 2)
    assert forms.j_act(dz(1, 1)) == -dzbar(1, 2)
    assert forms.j_act(dz(1, 2)) == dzbar(1, 1)
    assert forms.j_act(dzbar(1, 2)) == dz(1, 1)


@pytest.mark.parametrize("n", [1, 2])
def test_j_preserves_volume(n):
    vol = volume_form(n)
    assert forms.j_act(vol) == vol
    ones = [[int(r == c) for c in range(4 * n)] for r in range(4 * n)]
    assert evaluate_multilinear(vol, ones) == 1


# reality ------------------------------------------------------------------------------------


def test_conjugation_examples():
    assert conj_form(dz(1, 1)) == dzbar(1, 1)
    assert conj_form(parse_form("i*dz1^dzbar2", 2)) == parse_form("-i*dzbar1^dz2", 2)


def test_reality_examples():
    assert is_real(parse_form("dz1^dz2", 1))
    assert not is_real(parse_form("i*dz1^dz2", 1))


@given(seeds, st.integers(1, 2))
def test_ddj_of_real_polynomial_is_real(seed, n):
    from quatpsh.corpus import random_polynomial_field

    assert is_real(ddj_potential(random_polynomial_field(rng_from(seed), n)))


# the t-isomorphism ------------------------------------------------------------------------


def test_t_examples():
    assert t_map(parse_form("dz1^dz2", 1)) == HyperhermitianMatrix.identity(1)
    assert t_map(Form.zero(1)) == HyperhermitianMatrix.zeros(1)
    assert t_inv(HyperhermitianMatrix.identity(1)) == parse_form("dz1^dz2", 1)
    assert t_inv(HyperhermitianMatrix.zeros(2)).is_zero()
    assert t_map(parse_form("dz1^dz2 + dz3^dz4", 2)) == HyperhermitianMatrix.identity(2)


def test_t_is_the_quadratic_form():
    # B(X, X) = eta(X, X*j) equals xi* t(eta) xi
    from quatpsh.hherm import quadratic_form
    from quatpsh.quat import real_to_vector

    rng = rng_from(5)
    rj = right_action_matrix(Quaternion(0, 0, 1), 2).rows
    for _ in range(5):
        eta = random_real_2form(rng, 2)
        x = random_point(rng, 8)
        xj = [sum(rj[r][c] * x[c] for c in range(8)) for r in range(8)]
        assert evaluate_multilinear(eta, [x, xj]) == CQ.coerce(quadratic_form(t_map(eta), real_to_vector(x)))


def test_t_rejects_bad_input():
    with pytest.raises(ValueError):
        t_map(parse_form("i*dz1^dz2", 1))
    with pytest.raises(ValueError):
        t_map(parse_form("dz1^dzbar1", 1))


@given(seeds, st.integers(1, 3))
def test_t_round_trips(seed, n):
    rng = rng_from(seed)
    g = random_hyperhermitian(rng, n)
    assert t_map(t_inv(g)) == g
    eta = random_real_2form(rng, n)
    assert t_inv(t_map(eta)) == eta


@given(seeds)
def test_t_is_linear(seed):
    rng = rng_from(seed)
    a, b = random_hyperhermitian(rng, 2), random_hyperhermitian(rng, 2)
    assert t_inv(a + b) == t_inv(a) + t_inv(b)


# top degree ----------------------------------------------------------------------------------


def test_top_ratio_examples():
    for n in (1, 2):
        top = Form.word(n, tuple(range(2 * n)), math.factorial(n))
        assert top_ratio(top) == Poly.const(4 * n, 1)
    assert top_ratio(Form.zero(2)).is_zero()


@given(seeds, st.integers(1, 2))
def test_top_ratio_is_mixed_det(seed, n):
    rng = rng_from(seed)
    etas = [random_real_2form(rng, n, spread=2) for _ in range(n)]
    assert top_ratio(wedge_all(etas)).constant_value() == CQ.coerce(mixed_det([t_map(e) for e in etas]))


# pullback --------------------------------------------------------------------------------


def test_pullback_along_coordinate_projections():
    generator = parse_form("dz1^dz2", 1)
    one, zero = Quaternion(1), Quaternion(0)
    assert pullback(generator, QuaternionMatrix([[one, zero]])) == parse_form("dz1^dz2", 2)
    assert pullback(generator, QuaternionMatrix([[zero, one]])) == parse_form("dz3^dz4", 2)


def test_pullback_of_top_form_is_nonnegative():
    rng = rng_from(2)
    from quatpsh.hherm import random_quaternion_matrix, moore_det

    for _ in range(3):
        f = random_quaternion_matrix(rng, 2, spread=2)
        image = pullback(parse_form("dz1^dz2^dz3^dz4", 2), f)
        ratio = top_ratio(image).constant_value()
        assert ratio.im == 0 and ratio.re >= 0
        assert image.has_bidegree(4, 0)


# literals ------------------------------------------------------------------------------------


def test_parse_errors_carry_position():
    with pytest.raises(FormSyntaxError) as err:
        parse_form("dz1^^dz2", 1)
    assert (err.value.line, err.value.column) == (1, 5)
    with pytest.raises(ValueError):
        parse_form("dz3", 1)


@given(seeds, st.sampled_from(BIDEGREES))
def test_text_and_json_round_trip(seed, bideg):
    w = corpus_form(seed, 2, bideg)
    assert Form.from_json(w.to_json()) == w
    assert parse_form(str(w), 2) == w
