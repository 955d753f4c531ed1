"""Quaternions, quaternionic matrices and their real realizations.

H^n is a right H-module; a quaternionic matrix acts on column vectors by
left multiplication.  The real basis of R^{4n} is ordered
``(t1, x1, y1, z1, ..., tn, xn, yn, zn)``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence

from .scalars import format_rational, parse_rational, to_fraction

__all__ = [
    "Quaternion",
    "QuaternionMatrix",
    "RealMatrix",
    "quat_mul",
    "conj",
    "realize",
    "right_action_matrix",
    "left_mult_block",
    "right_mult_block",
    "vector_to_real",
    "real_to_vector",
]


def _coerce_component(value):
    if isinstance(value, float):
        return value
    return to_fraction(value)


class Quaternion:
    """``t + x*i + y*j + z*k`` with exact (Fraction) or float components."""

    __slots__ = ("t", "x", "y", "z")

    def __init__(self, t=0, x=0, y=0, z=0):
        comps = [_coerce_component(c) for c in (t, x, y, z)]
        if any(isinstance(c, float) for c in comps):
            comps = [float(c) for c in comps]
        self.t, self.x, self.y, self.z = comps

    @classmethod
    def coerce(cls, value) -> "Quaternion":
        if isinstance(value, Quaternion):
            return value
        return cls(value)

    @property
    def components(self) -> tuple:
        return (self.t, self.x, self.y, self.z)

    @property
    def exact(self) -> bool:
        return not isinstance(self.t, float)

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other):
        o = Quaternion.coerce(other)
        return Quaternion(self.t + o.t, self.x + o.x, self.y + o.y, self.z + o.z)

    __radd__ = __add__

    def __sub__(self, other):
        o = Quaternion.coerce(other)
        return Quaternion(self.t - o.t, self.x - o.x, self.y - o.y, self.z - o.z)

    def __rsub__(self, other):
        return Quaternion.coerce(other) - self

    def __neg__(self):
        return Quaternion(-self.t, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        s = _coerce_component(other)
        return Quaternion(self.t * s, self.x * s, self.y * s, self.z * s)

    def __rmul__(self, other):
        # real scalars are central, so left and right scaling agree
        s = _coerce_component(other)
        return Quaternion(s * self.t, s * self.x, s * self.y, s * self.z)

    def __truediv__(self, other):
        if isinstance(other, Quaternion):
            return self * other.inverse()
        s = _coerce_component(other)
        return Quaternion(self.t / s, self.x / s, self.y / s, self.z / s)

    def conj(self) -> "Quaternion":
        return Quaternion(self.t, -self.x, -self.y, -self.z)

    def norm2(self):
        return self.t * self.t + self.x * self.x + self.y * self.y + self.z * self.z

    def inverse(self) -> "Quaternion":
        n2 = self.norm2()
        if n2 == 0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return self.conj() / n2

    def is_real(self) -> bool:
        return self.x == 0 and self.y == 0 and self.z == 0

    def is_zero(self) -> bool:
        return self.t == 0 and self.is_real()

    def __eq__(self, other):
        if isinstance(other, Quaternion):
            return self.components == other.components
        if isinstance(other, (int, Fraction, float)):
            return self.is_real() and self.t == other
        return NotImplemented

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return "Quaternion({})".format(", ".join(format_rational(c) for c in self.components))

    def __str__(self):
        parts = []
        for coeff, unit in zip(self.components, ("", "i", "j", "k")):
            if coeff == 0:
                continue
            if unit and coeff in (1, -1):
                text = unit if coeff == 1 else "-" + unit
            else:
                text = format_rational(coeff) + unit
            parts.append(text)
        if not parts:
            return "0"
        out = parts[0]
        for p in parts[1:]:
            out += p if p.startswith("-") else "+" + p
        return out

    # JSON ------------------------------------------------------------
    def to_json(self) -> dict:
        return {k: format_rational(v) for k, v in zip("txyz", self.components)}

    @classmethod
    def from_json(cls, data) -> "Quaternion":
        if isinstance(data, Quaternion):
            return data
        if isinstance(data, str):
            return parse_quaternion(data)
        if isinstance(data, int):
            return cls(_json_scalar(data))
        if isinstance(data, float):
            return cls(data)
        if isinstance(data, (list, tuple)):
            if len(data) != 4:
                raise ValueError("quaternion arrays need 4 components")
            return cls(*(_json_scalar(v) for v in data))
        if isinstance(data, dict):
            unknown = set(data) - set("txyz")
            if unknown:
                raise ValueError(f"unknown quaternion keys: {sorted(unknown)}")
            return cls(*(_json_scalar(data.get(k, 0)) for k in "txyz"))
        raise TypeError(f"cannot decode quaternion from {type(data).__name__}")


_QUAT_TERM = re.compile(r"([+-]?)(\d+(?:\.\d*)?(?:/\d+)?)?\*?([ijk]?)")


def parse_quaternion(text: str) -> Quaternion:
    """Read literals such as ``"2"``, ``"-j"``, ``"1+3/2i-k"`` or ``"0.5*j"``."""
    if re.search(r"[\d.]\s+[\d.]", text):
        raise ValueError(f"bad quaternion literal {text!r}")
    compact = "".join(text.split())
    comps = [Fraction(0)] * 4
    pos = 0
    while pos < len(compact):
        m = _QUAT_TERM.match(compact, pos)
        sign, coeff, unit = m.groups()
        if not coeff and not unit or (pos and not sign):
            raise ValueError(f"bad quaternion literal {text!r}")
        value = parse_rational(coeff) if coeff else Fraction(1)
        comps[" ijk".index(unit) if unit else 0] += -value if sign == "-" else value
        pos = m.end()
    if not compact:
        raise ValueError("empty quaternion literal")
    return Quaternion(*comps)


def _json_scalar(value):
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, float):
        return value
    return to_fraction(value)


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    at, ax, ay, az = a.t, a.x, a.y, a.z
    bt, bx, by, bz = b.t, b.x, b.y, b.z
    return Quaternion(
        at * bt - ax * bx - ay * by - az * bz,
        at * bx + ax * bt + ay * bz - az * by,
        at * by - ax * bz + ay * bt + az * bx,
        at * bz + ax * by - ay * bx + az * bt,
    )


def conj(q: Quaternion) -> Quaternion:
    return q.conj()


BASIS = (Quaternion(1), Quaternion(0, 1), Quaternion(0, 0, 1), Quaternion(0, 0, 0, 1))
ONE, QI, QJ, QK = BASIS


class RealMatrix:
    """Dense real matrix (rows of scalars) with an optional symmetry flag."""

    __slots__ = ("rows", "symmetric")

    def __init__(self, rows: Iterable[Iterable], symmetric: bool = False):
        self.rows = tuple(tuple(r) for r in rows)
        if self.rows and any(len(r) != len(self.rows[0]) for r in self.rows):
            raise ValueError("ragged matrix")
        if symmetric:
            n = len(self.rows)
            if any(len(r) != n for r in self.rows) or any(
                self.rows[i][j] != self.rows[j][i] for i in range(n) for j in range(i)
            ):
                raise ValueError("matrix flagged symmetric is not symmetric")
        self.symmetric = symmetric

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    def __getitem__(self, idx):
        i, j = idx
        return self.rows[i][j]

    def __matmul__(self, other: "RealMatrix") -> "RealMatrix":
        m, k = self.shape
        k2, p = other.shape
        if k != k2:
            raise ValueError("shape mismatch")
        cols = list(zip(*other.rows))
        return RealMatrix([[sum(a * b for a, b in zip(row, col)) for col in cols] for row in self.rows])

    def __neg__(self):
        return RealMatrix([[-v for v in r] for r in self.rows], self.symmetric)

    def __eq__(self, other):
        if not isinstance(other, RealMatrix):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def transpose(self) -> "RealMatrix":
        return RealMatrix(zip(*self.rows))

    def is_symmetric(self) -> bool:
        m, n = self.shape
        return m == n and all(self.rows[i][j] == self.rows[j][i] for i in range(n) for j in range(i))

    @classmethod
    def identity(cls, n: int) -> "RealMatrix":
        return cls([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], symmetric=True)

    def to_numpy(self):
        import numpy as np

        return np.array([[float(v) for v in r] for r in self.rows])

    def __repr__(self):
        return f"RealMatrix({self.shape[0]}x{self.shape[1]})"


class QuaternionMatrix:
    """Dense row-major matrix of quaternions."""

    __slots__ = ("nrows", "ncols", "entries")

    def __init__(self, rows: Sequence[Sequence]):
        entries = tuple(tuple(Quaternion.coerce(v) for v in r) for r in rows)
        if not entries or not entries[0]:
            raise ValueError("quaternionic matrices must be non-empty")
        ncols = len(entries[0])
        if any(len(r) != ncols for r in entries):
            raise ValueError("ragged quaternionic matrix")
        self.nrows = len(entries)
        self.ncols = ncols
        self.entries = entries

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, idx) -> Quaternion:
        i, j = idx
        return self.entries[i][j]

    def __add__(self, other: "QuaternionMatrix") -> "QuaternionMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return QuaternionMatrix(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)]
        )

    def __sub__(self, other: "QuaternionMatrix") -> "QuaternionMatrix":
        return self + (-1) * other

    def __rmul__(self, scalar) -> "QuaternionMatrix":
        return QuaternionMatrix([[scalar * v for v in r] for r in self.entries])

    def __matmul__(self, other: "QuaternionMatrix") -> "QuaternionMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.nrows):
            row = []
            for j in range(other.ncols):
                acc = Quaternion(0)
                for k in range(self.ncols):
                    acc = acc + quat_mul(self.entries[i][k], other.entries[k][j])
                row.append(acc)
            out.append(row)
        return QuaternionMatrix(out)

    def conj_transpose(self) -> "QuaternionMatrix":
        return QuaternionMatrix(
            [[self.entries[i][j].conj() for i in range(self.nrows)] for j in range(self.ncols)]
        )

    def transpose(self) -> "QuaternionMatrix":
        return QuaternionMatrix([[self.entries[i][j] for i in range(self.nrows)] for j in range(self.ncols)])

    def apply(self, vec: Sequence[Quaternion]) -> list[Quaternion]:
        if len(vec) != self.ncols:
            raise ValueError("vector length mismatch")
        out = []
        for row in self.entries:
            acc = Quaternion(0)
            for a, v in zip(row, vec):
                acc = acc + quat_mul(a, v)
            out.append(acc)
        return out

    @classmethod
    def identity(cls, n: int) -> "QuaternionMatrix":
        return cls([[Quaternion(int(i == j)) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, m: int, n: int | None = None) -> "QuaternionMatrix":
        return cls([[Quaternion(0)] * (m if n is None else n) for _ in range(m)])

    @classmethod
    def diag(cls, values: Sequence) -> "QuaternionMatrix":
        n = len(values)
        return cls([[Quaternion.coerce(values[i]) if i == j else Quaternion(0) for j in range(n)] for i in range(n)])

    def __eq__(self, other):
        if not isinstance(other, QuaternionMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return "QuaternionMatrix([{}])".format(
            ", ".join("[" + ", ".join(str(v) for v in r) + "]" for r in self.entries)
        )

    def to_json(self) -> list:
        return [[v.to_json() for v in r] for r in self.entries]

    @classmethod
    def from_json(cls, data) -> "QuaternionMatrix":
        return cls([[Quaternion.from_json(v) for v in r] for r in data])


def left_mult_block(q: Quaternion) -> list[list]:
    """4x4 real matrix of p -> q*p in the basis (1, i, j, k)."""
    cols = [quat_mul(q, e).components for e in BASIS]
    return [[cols[c][r] for c in range(4)] for r in range(4)]


def right_mult_block(q: Quaternion) -> list[list]:
    """4x4 real matrix of p -> p*q in the basis (1, i, j, k)."""
    cols = [quat_mul(e, q).components for e in BASIS]
    return [[cols[c][r] for c in range(4)] for r in range(4)]


def realize(a: QuaternionMatrix) -> RealMatrix:
    """Real 4n x 4n matrix of X -> A*X on H^n."""
    if a.nrows != a.ncols:
        raise ValueError("realize() needs a square quaternionic matrix")
    return realize_rect(a)


def realize_rect(a: QuaternionMatrix) -> RealMatrix:
    """Real 4m x 4n matrix of an H-linear map H^n -> H^m."""
    m, n = a.shape
    zero = Fraction(0) if a.entries[0][0].exact else 0.0
    rows = [[zero] * (4 * n) for _ in range(4 * m)]
    for i in range(m):
        for j in range(n):
            block = left_mult_block(a.entries[i][j])
            for r in range(4):
                for c in range(4):
                    rows[4 * i + r][4 * j + c] = block[r][c]
    return RealMatrix(rows)


def right_action_matrix(unit: Quaternion, n: int) -> RealMatrix:
    """Real 4n x 4n matrix of X -> X*L (componentwise), requiring L*L = -1.

    Composition follows the right action: ``X*(L1*L2)`` is obtained by
    applying ``right_action_matrix(L1)`` first, so
    ``right_action_matrix(L1*L2) == right_action_matrix(L2) @ right_action_matrix(L1)``.
    """
    unit = Quaternion.coerce(unit)
    if quat_mul(unit, unit) != Quaternion(-1):
        raise ValueError(f"{unit} does not square to -1")
    block = right_mult_block(unit)
    zero = Fraction(0) if unit.exact else 0.0
    rows = [[zero] * (4 * n) for _ in range(4 * n)]
    for a in range(n):
        for r in range(4):
            for c in range(4):
                rows[4 * a + r][4 * a + c] = block[r][c]
    return RealMatrix(rows)


def vector_to_real(vec: Sequence[Quaternion]) -> list:
    out = []
    for q in vec:
        out.extend(Quaternion.coerce(q).components)
    return out


def real_to_vector(coords: Sequence) -> list[Quaternion]:
    if len(coords) % 4:
        raise ValueError("real vector length must be a multiple of 4")
    return [Quaternion(*coords[i : i + 4]) for i in range(0, len(coords), 4)]
