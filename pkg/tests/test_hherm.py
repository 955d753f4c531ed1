import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quatpsh import linalg
from quatpsh.hherm import (
    AmbiguityError,
    CapacityError,
    HyperhermitianMatrix,
    mixed_det,
    moore_det,
    moore_det_via_realization,
    positivity,
    quadratic_form,
    random_hyperhermitian,
    random_quaternion_matrix,
)
from quatpsh.quat import Quaternion, QuaternionMatrix, realize

from conftest import rng_from, seeds

I, J = Quaternion(0, 1), Quaternion(0, 0, 1)


def schur_oracle(a: HyperhermitianMatrix):
    """Moore determinant by symmetric Gaussian elimination with pivoting.

    Each real diagonal pivot p gives P(A) = p * P(Schur complement); when
    all diagonal entries vanish a congruence by an elementary matrix
    with determinant one brings a nonzero entry to the diagonal.
    """
    rows = [list(r) for r in a.entries.entries]
    n = len(rows)
    if n == 0:
        return Fraction(1)
    piv = next((i for i in range(n) if rows[i][i] != 0), None)
    if piv is None:
        off = next(((i, j) for i in range(n) for j in range(n) if rows[i][j] != 0), None)
        if off is None:
            return Fraction(0)
        i, j = off
        # unipotent C with C[j][i] = conj(a_ij) puts 2|a_ij|^2 on the diagonal
        e = [[Quaternion(int(r == s)) for s in range(n)] for r in range(n)]
        e[j][i] = rows[i][j].conj()
        return schur_oracle(a.congruence(QuaternionMatrix(e)))
    p = rows[piv][piv].t
    order = [piv] + [i for i in range(n) if i != piv]
    rest = order[1:]
    inv = Fraction(1) / p
    sub = [[rows[r][s] - rows[r][piv] * rows[piv][s] * inv for s in rest] for r in rest]
    return p * schur_oracle(HyperhermitianMatrix(sub)) if rest else p


def test_worked_examples():
    assert moore_det(HyperhermitianMatrix.diag([1, 2, 3])) == 6
    m = HyperhermitianMatrix([[Quaternion(2), I], [-I, Quaternion(3)]])
    assert moore_det(m) == 5
    for n in range(1, 6):
        assert moore_det(HyperhermitianMatrix.identity(n)) == 1


def test_rejects_non_hyperhermitian():
    with pytest.raises(ValueError):
        HyperhermitianMatrix([[Quaternion(1), I], [I, Quaternion(1)]])
    with pytest.raises(ValueError):
        HyperhermitianMatrix([[Quaternion(0, 1)]])


def test_capacity_bound():
    with pytest.raises(CapacityError):
        moore_det(HyperhermitianMatrix.identity(3), max_n=2)


@given(seeds, st.integers(1, 4))
def test_matches_schur_oracle(seed, n):
    a = random_hyperhermitian(rng_from(seed), n)
    assert moore_det(a) == schur_oracle(a)


@given(seeds, st.integers(1, 3))
def test_realization_determinant(seed, n):
    a = random_hyperhermitian(rng_from(seed), n)
    assert linalg.det(realize(a.entries).rows) == moore_det(a) ** 4


@given(seeds, st.integers(1, 3))
def test_realization_route(seed, n):
    a = random_hyperhermitian(rng_from(seed), n)
    assert moore_det_via_realization(a) == moore_det(a)


def test_realization_route_examples():
    assert moore_det_via_realization(HyperhermitianMatrix.diag([-1, 2])) == -2
    assert moore_det_via_realization(HyperhermitianMatrix.identity(3)) == 1
    floats = HyperhermitianMatrix.diag([-1.0, 2.0])
    assert moore_det_via_realization(floats) == pytest.approx(-2.0)


def test_float_route_ambiguity_is_reported():
    # roundoff splits each quadruple slightly; a zero tolerance cannot group them
    noisy = HyperhermitianMatrix([[Quaternion(0.3), Quaternion(0.1, 0.7, 0.2, 0.9)], [Quaternion(0.1, -0.7, -0.2, -0.9), Quaternion(1.7)]])
    assert moore_det_via_realization(noisy) == pytest.approx(0.3 * 1.7 - (0.01 + 0.49 + 0.04 + 0.81))
    with pytest.raises(AmbiguityError):
        moore_det_via_realization(noisy, tol=0.0)


@given(seeds, st.integers(1, 3))
def test_congruence(seed, n):
    rng = rng_from(seed)
    a = random_hyperhermitian(rng, n)
    c = random_quaternion_matrix(rng, n, spread=2)
    gram = HyperhermitianMatrix.identity(n).congruence(c)
    assert moore_det(a.congruence(c)) == moore_det(a) * moore_det(gram)


@given(seeds, st.integers(1, 3))
def test_complex_hermitian_agrees_with_determinant(seed, n):
    rng = rng_from(seed)
    vals = {}
    for r in range(n):
        vals[r, r] = complex(rng.randint(-3, 3))
        for s in range(r + 1, n):
            vals[r, s] = complex(rng.randint(-3, 3), rng.randint(-3, 3))
            vals[s, r] = vals[r, s].conjugate()
    a = HyperhermitianMatrix([[Quaternion(int(vals[r, s].real), int(vals[r, s].imag)) for s in range(n)] for r in range(n)])
    ref = np.linalg.det(np.array([[vals[r, s] for s in range(n)] for r in range(n)]))
    assert float(moore_det(a)) == pytest.approx(ref.real, abs=1e-9)


@given(seeds, st.integers(1, 3))
def test_moore_det_is_real(seed, n):
    value = moore_det(random_hyperhermitian(rng_from(seed), n))
    assert isinstance(value, Fraction)


# mixed determinant ---------------------------------------------------------


def test_mixed_units():
    for n in range(1, 5):
        units = [HyperhermitianMatrix.unit(n, i) for i in range(n)]
        assert mixed_det(units) == Fraction(1, math.factorial(n))


def test_mixed_zero_argument():
    rng = rng_from(1)
    a = random_hyperhermitian(rng, 3)
    assert mixed_det([a, HyperhermitianMatrix.zeros(3), a]) == 0


@given(seeds, st.integers(1, 3))
def test_mixed_diagonal_is_moore(seed, n):
    a = random_hyperhermitian(rng_from(seed), n)
    assert mixed_det([a] * n) == moore_det(a)


@given(seeds)
def test_mixed_symmetric_and_multilinear(seed):
    rng = rng_from(seed)
    a, b, c, d = (random_hyperhermitian(rng, 3, spread=2) for _ in range(4))
    base = mixed_det([a, b, c])
    for perm in itertools.permutations([a, b, c]):
        assert mixed_det(list(perm)) == base
    lam = Fraction(rng.randint(-3, 3), 2)
    assert mixed_det([lam * a + d, b, c]) == lam * base + mixed_det([d, b, c])


def test_mixed_size_mismatch():
    with pytest.raises(ValueError):
        mixed_det([HyperhermitianMatrix.identity(2)])


# positivity ------------------------------------------------------------------


def test_positivity_examples():
    assert positivity(HyperhermitianMatrix.identity(3)).verdict == "positive-definite"
    cert = positivity(HyperhermitianMatrix.diag([1, -1]))
    assert cert.verdict == "indefinite"
    assert cert.witness[0] == 0 and cert.witness[1] != 0
    assert quadratic_form(HyperhermitianMatrix.diag([1, -1]), cert.witness) == cert.witness_value < 0
    m = HyperhermitianMatrix([[Quaternion(1), J], [-J, Quaternion(1)]])
    assert positivity(m).verdict == "positive-semidefinite"
    assert moore_det(m) == 0
    eig = np.linalg.eigvalsh(realize(m.entries).to_numpy())
    assert np.allclose(eig, [0, 0, 0, 0, 2, 2, 2, 2])


@given(seeds, st.integers(1, 3))
def test_positivity_matches_spectrum(seed, n):
    a = random_hyperhermitian(rng_from(seed), n)
    cert = positivity(a)
    eig = np.linalg.eigvalsh(realize(a.entries).to_numpy())
    if cert.verdict == "indefinite":
        assert quadratic_form(a, cert.witness) < 0
        assert eig[0] < 0
    elif cert.verdict == "positive-definite":
        assert eig[0] > 0
    else:
        assert abs(eig[0]) < 1e-9


@given(seeds, st.integers(1, 3))
def test_gram_matrices_are_psd(seed, n):
    c = random_quaternion_matrix(rng_from(seed), n, spread=2)
    assert positivity(HyperhermitianMatrix.identity(n).congruence(c)).is_psd


def test_float_positivity():
    cert = positivity(HyperhermitianMatrix.diag([1.0, -0.5]))
    assert cert.verdict == "indefinite"
    assert quadratic_form(HyperhermitianMatrix.diag([1.0, -0.5]), cert.witness) < 0


def test_json_round_trip():
    a = random_hyperhermitian(rng_from(4), 3)
    assert HyperhermitianMatrix.from_json(a.to_json()) == a
