"""Hyperhermitian matrices, Moore and mixed determinants, positivity."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .quat import Quaternion, QuaternionMatrix, quat_mul, real_to_vector, realize

__all__ = [
    "HyperhermitianMatrix",
    "PositivityCertificate",
    "CapacityError",
    "AmbiguityError",
    "moore_det",
    "moore_det_via_realization",
    "mixed_det",
    "positivity",
    "quadratic_form",
    "random_hyperhermitian",
    "random_quaternion",
    "random_quaternion_matrix",
]

DEFAULT_MAX_N = 8


class CapacityError(ValueError):
    """Matrix too large for the factorial-time expansion."""


class AmbiguityError(ArithmeticError):
    """Float eigenvalues could not be grouped into quadruples."""


class HyperhermitianMatrix:
    """Square quaternionic matrix with ``a_ij == conj(a_ji)``.

    With ``atol > 0`` near-hyperhermitian float input is accepted and
    replaced by its hyperhermitian part.
    """

    __slots__ = ("n", "entries")

    def __init__(self, entries, atol: float = 0.0):
        if not isinstance(entries, QuaternionMatrix):
            entries = QuaternionMatrix(entries)
        if entries.nrows != entries.ncols:
            raise ValueError("hyperhermitian matrices are square")
        n = entries.nrows
        rows = [list(r) for r in entries.entries]
        for i in range(n):
            for j in range(i, n):
                a, b = rows[i][j], rows[j][i].conj()
                if atol == 0.0:
                    if a != b:
                        raise ValueError(f"entry ({i},{j}) is not the conjugate of ({j},{i})")
                    continue
                if max(abs(float(u) - float(v)) for u, v in zip(a, b)) > atol:
                    raise ValueError(f"entry ({i},{j}) differs from conj of ({j},{i}) beyond {atol}")
                mean = (a + b) * 0.5
                rows[i][j] = mean
                rows[j][i] = mean.conj()
        if atol:
            entries = QuaternionMatrix(rows)
        self.n = n
        self.entries = entries

    def __getitem__(self, idx) -> Quaternion:
        return self.entries[idx]

    @property
    def exact(self) -> bool:
        return self.entries[0, 0].exact

    def __add__(self, other: "HyperhermitianMatrix") -> "HyperhermitianMatrix":
        return HyperhermitianMatrix(self.entries + other.entries)

    def __rmul__(self, scalar) -> "HyperhermitianMatrix":
        return HyperhermitianMatrix(scalar * self.entries)

    def __neg__(self):
        return (-1) * self

    def __eq__(self, other):
        if not isinstance(other, HyperhermitianMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"HyperhermitianMatrix({self.entries!r})"

    @classmethod
    def identity(cls, n: int) -> "HyperhermitianMatrix":
        return cls(QuaternionMatrix.identity(n))

    @classmethod
    def zeros(cls, n: int) -> "HyperhermitianMatrix":
        return cls(QuaternionMatrix.zeros(n))

    @classmethod
    def diag(cls, values: Sequence) -> "HyperhermitianMatrix":
        return cls(QuaternionMatrix.diag(values))

    @classmethod
    def unit(cls, n: int, i: int) -> "HyperhermitianMatrix":
        vals = [0] * n
        vals[i] = 1
        return cls.diag(vals)

    def congruence(self, c: QuaternionMatrix) -> "HyperhermitianMatrix":
        """``C* A C``."""
        return HyperhermitianMatrix(c.conj_transpose() @ self.entries @ c)

    def to_json(self) -> dict:
        return {"n": self.n, "entries": self.entries.to_json()}

    @classmethod
    def from_json(cls, data) -> "HyperhermitianMatrix":
        if isinstance(data, dict):
            entries = QuaternionMatrix.from_json(data["entries"])
            if "n" in data and int(data["n"]) != entries.nrows:
                raise ValueError("declared n does not match the entries")
            return cls(entries)
        return cls(QuaternionMatrix.from_json(data))


# Moore determinant -------------------------------------------------------


def _qmul(a, b):
    at, ax, ay, az = a
    bt, bx, by, bz = b
    return (
        at * bt - ax * bx - ay * by - az * bz,
        at * bx + ax * bt + ay * bz - az * by,
        at * by - ax * bz + ay * bt + az * bx,
        at * bz + ax * by - ay * bx + az * bt,
    )


def moore_det(a: HyperhermitianMatrix, max_n: int = DEFAULT_MAX_N):
    """Moore determinant by the ordered cycle expansion.

    Each permutation contributes its sign times the product of its cycles,
    every cycle read from its smallest index, cycles ordered by decreasing
    smallest index.  The sum is built back to front: the last cycle holds
    the smallest remaining index, so suffix products are shared between
    permutations.  Exact entries are scaled to integers first.
    """
    n = a.n
    if n > max_n:
        raise CapacityError(f"n = {n} exceeds the factorial bound {max_n}")
    if a.exact:
        scale = 1
        for row in a.entries.entries:
            for q in row:
                for c in q:
                    scale = math.lcm(scale, c.denominator)
        m = [[tuple(int(c * scale) for c in q) for q in row] for row in a.entries.entries]
    else:
        scale = 1
        m = [[q.components for q in row] for row in a.entries.entries]
    zero = (0, 0, 0, 0)
    total = [0, 0, 0, 0]

    def close(remaining: int, suffix, sign: int):
        if not remaining:
            for c in range(4):
                total[c] += sign * suffix[c]
            return
        start = (remaining & -remaining).bit_length() - 1
        extend(remaining & ~(1 << start), start, start, (1, 0, 0, 0), 0, suffix, sign)

    def extend(remaining, start, cur, prefix, length, suffix, sign):
        closed = _qmul(prefix, m[cur][start])
        if closed != zero:
            close(remaining, _qmul(closed, suffix), -sign if length % 2 else sign)
        rest = remaining
        while rest:
            bit = rest & -rest
            rest ^= bit
            nxt = bit.bit_length() - 1
            step = m[cur][nxt]
            if step == zero:
                continue
            extend(remaining ^ bit, start, nxt, _qmul(prefix, step), length + 1, suffix, sign)

    close((1 << n) - 1, (1, 0, 0, 0), 1)
    if a.exact:
        if any(total[1:]):
            raise ArithmeticError(f"Moore expansion produced a non-real value {total}")
        return Fraction(total[0], scale**n)
    return float(total[0])


def _fraction_root4(value: Fraction) -> Fraction | None:
    def iroot(k: int) -> int | None:
        r = math.isqrt(math.isqrt(k))
        for cand in (r, r + 1):
            if cand**4 == k:
                return cand
        return None

    num, den = iroot(value.numerator), iroot(value.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def moore_det_via_realization(a: HyperhermitianMatrix, tol: float = 1e-9):
    """Moore determinant from ``det(realize(A)) = P^4`` plus a sign.

    Exact input: the magnitude is the exact fourth root and the sign is
    read off the inertia of ``realize(A)``, whose negative eigenvalues come
    in blocks of four.  Float input: eigenvalues are grouped as quadruples.
    """
    real = realize(a.entries)
    if a.exact:
        d = linalg.det(real.rows)
        if d == 0:
            return Fraction(0)
        root = _fraction_root4(d)
        if root is None:
            raise ArithmeticError("determinant of the realization is not a fourth power")
        _, neg, _ = linalg.inertia(real.rows)
        if neg % 4:
            raise ArithmeticError("negative eigenvalues of a realization must come in fours")
        return root * (-1) ** (neg // 4)

    import numpy as np

    eig = np.linalg.eigvalsh(real.to_numpy())
    result = 1.0
    for g in range(a.n):
        quad = eig[4 * g : 4 * g + 4]
        scale = max(1.0, abs(float(quad.mean())))
        if float(quad.max() - quad.min()) > tol * scale:
            raise AmbiguityError(f"eigenvalues {quad.tolist()} do not form a quadruple")
        result *= float(quad.mean())
    return result


def mixed_det(mats: Sequence[HyperhermitianMatrix], max_n: int = DEFAULT_MAX_N):
    """Polarized Moore determinant of ``n`` hyperhermitian ``n x n`` matrices."""
    mats = list(mats)
    if not mats:
        raise ValueError("mixed_det needs at least one matrix")
    n = mats[0].n
    if len(mats) != n or any(m.n != n for m in mats):
        raise ValueError("mixed_det needs n matrices of size n x n")
    total = 0
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            acc = mats[subset[0]]
            for idx in subset[1:]:
                acc = acc + mats[idx]
            total += (-1) ** (n - size) * moore_det(acc, max_n)
    if mats[0].exact:
        return Fraction(total) / math.factorial(n)
    return total / math.factorial(n)


# positivity ---------------------------------------------------------------


def quadratic_form(a: HyperhermitianMatrix, xi: Sequence[Quaternion]):
    """The real number ``xi* A xi``."""
    image = a.entries.apply([Quaternion.coerce(v) for v in xi])
    acc = Quaternion(0)
    for v, w in zip(xi, image):
        acc = acc + quat_mul(Quaternion.coerce(v).conj(), w)
    return acc.t


@dataclass
class PositivityCertificate:
    verdict: str  # positive-definite | positive-semidefinite | indefinite
    witness: list | None = None  # xi in H^n with xi* A xi < 0
    witness_value: object = None
    spectrum: dict = field(default_factory=dict)

    @property
    def is_psd(self) -> bool:
        return self.verdict != "indefinite"

    def to_json(self) -> dict:
        from .scalars import format_rational

        out = {"verdict": self.verdict, "spectrum": self.spectrum}
        if self.witness is not None:
            out["witness"] = [q.to_json() for q in self.witness]
            out["witness_value"] = format_rational(self.witness_value)
        return out


def positivity(a: HyperhermitianMatrix, tol: float = 1e-9, margin: float = 0.0) -> PositivityCertificate:
    """Classify ``A`` through the symmetric matrix ``realize(A)``.

    Exact input uses a congruence diagonalization; a negative pivot's
    transformation row is a negative direction.  Float input uses the
    spectrum; an eigenvalue counts as positive when it exceeds
    ``max(tol, margin)`` and as negative when below ``-tol``.
    """
    real = realize(a.entries)
    if a.exact:
        diag, transform = linalg.congruence_diagonalize(real.rows)
        pos = sum(1 for v in diag if v > margin)
        neg = [m for m, v in enumerate(diag) if v < 0]
        spectrum = {"positive": pos, "negative": len(neg), "zero": len(diag) - pos - len(neg)}
        if neg:
            m = min(neg, key=lambda idx: diag[idx])
            xi = real_to_vector(transform[m])
            value = quadratic_form(a, xi)
            assert value < 0
            return PositivityCertificate("indefinite", xi, value, spectrum)
        verdict = "positive-definite" if pos == len(diag) else "positive-semidefinite"
        return PositivityCertificate(verdict, spectrum=spectrum)

    import numpy as np

    vals, vecs = np.linalg.eigh(real.to_numpy())
    lo = float(vals[0])
    spectrum = {"min": lo, "max": float(vals[-1])}
    if lo < -tol:
        xi = real_to_vector([float(v) for v in vecs[:, 0]])
        return PositivityCertificate("indefinite", xi, quadratic_form(a, xi), spectrum)
    if lo > max(tol, margin):
        return PositivityCertificate("positive-definite", spectrum=spectrum)
    return PositivityCertificate("positive-semidefinite", spectrum=spectrum)


# random instances ----------------------------------------------------------


def random_quaternion(rng: random.Random, spread: int = 3, dens: Sequence[int] = (1, 2)) -> Quaternion:
    return Quaternion(*(Fraction(rng.randint(-spread, spread), rng.choice(dens)) for _ in range(4)))


def random_quaternion_matrix(rng: random.Random, m: int, n: int | None = None, spread: int = 3) -> QuaternionMatrix:
    n = m if n is None else n
    return QuaternionMatrix([[random_quaternion(rng, spread) for _ in range(n)] for _ in range(m)])


def random_hyperhermitian(rng: random.Random, n: int, spread: int = 3) -> HyperhermitianMatrix:
    rows = [[Quaternion(0)] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = Quaternion(Fraction(rng.randint(-spread, spread), rng.choice((1, 2))))
        for j in range(i + 1, n):
            q = random_quaternion(rng, spread)
            rows[i][j] = q
            rows[j][i] = q.conj()
    return HyperhermitianMatrix(rows)
