from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from quatpsh.hherm import random_quaternion, random_quaternion_matrix
from quatpsh.quat import (
    Quaternion,
    QuaternionMatrix,
    RealMatrix,
    conj,
    left_mult_block,
    parse_quaternion,
    quat_mul,
    real_to_vector,
    realize,
    right_action_matrix,
    right_mult_block,
    vector_to_real,
)

from conftest import rationals, rng_from, seeds

ONE, I, J, K = Quaternion(1), Quaternion(0, 1), Quaternion(0, 0, 1), Quaternion(0, 0, 0, 1)
BASIS = (ONE, I, J, K)

quaternions = st.builds(Quaternion, rationals, rationals, rationals, rationals)


def component_product(a, b):
    # Hamilton's table written out by components
    return Quaternion(
        a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z,
        a.t * b.x + a.x * b.t + a.y * b.z - a.z * b.y,
        a.t * b.y - a.x * b.z + a.y * b.t + a.z * b.x,
        a.t * b.z + a.x * b.y - a.y * b.x + a.z * b.t,
    )


def test_unit_relations():
    assert quat_mul(I, J) == K
    assert quat_mul(J, I) == -K
    assert quat_mul(J, K) == I
    assert quat_mul(K, I) == J
    for u in (I, J, K):
        assert quat_mul(u, u) == Quaternion(-1)


def test_worked_products():
    q = Quaternion(Fraction(1, 2), 3, -1, 2)
    assert quat_mul(ONE, q) == q
    assert quat_mul(I + J, I - J) == Quaternion(0, 0, 0, -2)


@given(quaternions, quaternions)
def test_product_matches_component_oracle(a, b):
    assert quat_mul(a, b) == component_product(a, b)
    assert a * b == quat_mul(a, b)


def test_conjugate_examples():
    assert conj(I) == -I
    assert conj(ONE) == ONE


@given(quaternions, quaternions)
def test_conjugate_reverses_products(q, p):
    assert conj(q * p) == conj(p) * conj(q)


@given(quaternions, quaternions)
def test_norm_is_multiplicative(q, p):
    assert (q * p).norm2() == q.norm2() * p.norm2()


@given(quaternions)
def test_inverse(q):
    if q.is_zero():
        with pytest.raises(ZeroDivisionError):
            q.inverse()
    else:
        assert q * q.inverse() == ONE


def test_realize_identity():
    assert realize(QuaternionMatrix.identity(3)) == RealMatrix.identity(12)


def test_realize_left_multiplication_by_i():
    m = realize(QuaternionMatrix([[I]]))
    for c, e in enumerate(BASIS):
        column = [m.rows[r][c] for r in range(4)]
        assert column == list(quat_mul(I, e).components)
    assert [list(r) for r in m.rows] == left_mult_block(I)


@given(seeds)
def test_realize_is_multiplicative(seed):
    rng = rng_from(seed)
    a = random_quaternion_matrix(rng, 2)
    b = random_quaternion_matrix(rng, 2)
    assert realize(a @ b) == realize(a) @ realize(b)


def test_right_multiplication_block():
    m = right_action_matrix(I, 1)
    for c, e in enumerate(BASIS):
        assert [m.rows[r][c] for r in range(4)] == list(quat_mul(e, I).components)
    assert [list(r) for r in m.rows] == right_mult_block(I)


@pytest.mark.parametrize("unit", [I, J, K])
@pytest.mark.parametrize("n", [1, 2])
def test_right_action_squares_to_minus_one(unit, n):
    m = right_action_matrix(unit, n)
    assert m @ m == -RealMatrix.identity(4 * n)


def test_right_action_composition_order():
    # X*(i*j) is X*i followed by *j
    ri, rj, rk = (right_action_matrix(u, 2) for u in (I, J, K))
    assert rj @ ri == rk
    rng = rng_from(3)
    for _ in range(5):
        vec = [random_quaternion(rng) for _ in range(2)]
        x = vector_to_real(vec)
        via_matrix = [sum(rk.rows[r][c] * x[c] for c in range(8)) for r in range(8)]
        assert real_to_vector(via_matrix) == [quat_mul(v, K) for v in vec]


def test_right_action_rejects_non_unit():
    with pytest.raises(ValueError):
        right_action_matrix(Quaternion(1, 1), 1)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("2", Quaternion(2)),
        ("-j", Quaternion(0, 0, -1)),
        ("1+3/2i-k", Quaternion(1, Fraction(3, 2), 0, -1)),
        ("0.5*j", Quaternion(0, 0, Fraction(1, 2))),
        ("-1/2 + 2 k", Quaternion(Fraction(-1, 2), 0, 0, 2)),
    ],
)
def test_parse_quaternion(text, expected):
    assert parse_quaternion(text) == expected


@pytest.mark.parametrize("text", ["", "1++i", "ij", "1 2"])
def test_parse_quaternion_rejects(text):
    with pytest.raises(ValueError):
        parse_quaternion(text)


@given(quaternions)
def test_json_round_trip(q):
    assert Quaternion.from_json(q.to_json()) == q
    assert parse_quaternion(str(q)) == q
