"""Sparse multivariate polynomials with complex-rational coefficients.

Variables are the real coordinates ``t1, x1, y1, z1, ..., tn, xn, yn, zn``;
a monomial is an exponent tuple of length ``4n``.  The stored dictionary
never holds zero coefficients, so equality is structural.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .scalars import CQ, format_rational

AXES = "txyz"


def var_name(index: int) -> str:
    return f"{AXES[index % 4]}{index // 4 + 1}"


def var_index(name: str) -> int:
    if len(name) < 2 or name[0] not in AXES or not name[1:].isdigit():
        raise ValueError(f"not a coordinate name: {name!r}")
    block = int(name[1:])
    if block < 1:
        raise ValueError(f"coordinate blocks start at 1: {name!r}")
    return 4 * (block - 1) + AXES.index(name[0])


class Poly:
    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple, object] | None = None):
        self.nvars = nvars
        clean = {}
        if terms:
            for exps, c in terms.items():
                c = CQ.coerce(c)
                if c:
                    if len(exps) != nvars:
                        raise ValueError("exponent tuple has the wrong length")
                    clean[tuple(exps)] = c
        self.terms = clean
        self._hash = None

    # constructors -----------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls(nvars)

    @classmethod
    def const(cls, nvars: int, value) -> "Poly":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def var(cls, nvars: int, index: int) -> "Poly":
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): 1})

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> "Poly":
        # terms already canonical
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._hash = None
        return p

    # arithmetic -------------------------------------------------------
    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different coordinate rings")
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            s = c if s is None else s + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, factor) -> "Poly":
        factor = CQ.coerce(factor)
        if not factor:
            return Poly.zero(self.nvars)
        return Poly._raw(self.nvars, {e: c * factor for e, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        other = self._lift(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e)
                out[e] = c1 * c2 if s is None else s + c1 * c2
        return Poly(self.nvars, out)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        return self.scale(CQ(1) / CQ.coerce(other))

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result = Poly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def diff(self, index: int) -> "Poly":
        out = {}
        for e, c in self.terms.items():
            k = e[index]
            if k:
                e2 = list(e)
                e2[index] = k - 1
                out[tuple(e2)] = c * k
        return Poly._raw(self.nvars, out)

    def conjugate(self) -> "Poly":
        return Poly._raw(self.nvars, {e: c.conjugate() for e, c in self.terms.items()})

    def real_part(self) -> "Poly":
        return Poly(self.nvars, {e: CQ(c.re) for e, c in self.terms.items()})

    def imag_part(self) -> "Poly":
        return Poly(self.nvars, {e: CQ(c.im) for e, c in self.terms.items()})

    # queries ----------------------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> CQ:
        return self.terms.get((0,) * self.nvars, CQ(0))

    def is_real(self) -> bool:
        return all(c.im == 0 for c in self.terms.values())

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def homogeneous_part(self, deg: int) -> "Poly":
        return Poly._raw(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == deg})

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction, CQ)):
            return self == Poly.const(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __call__(self, point: Sequence):
        return self.evaluate(point)

    def evaluate(self, point: Sequence):
        """Value at a real point: a CQ for exact points, complex for floats."""
        if len(point) != self.nvars:
            raise ValueError(f"point needs {self.nvars} coordinates")
        exact = all(not isinstance(v, float) for v in point)
        if exact:
            pt = [Fraction(v) for v in point]
            acc = CQ(0)
            for e, c in self.terms.items():
                mono = Fraction(1)
                for v, k in zip(pt, e):
                    if k:
                        mono *= v**k
                acc = acc + c * mono
            return acc
        acc = 0j
        for e, c in self.terms.items():
            mono = 1.0
            for v, k in zip(point, e):
                if k:
                    mono *= float(v) ** k
            acc += complex(c) * mono
        return acc

    # printing ---------------------------------------------------------
    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for e in sorted(self.terms, key=lambda e: (-sum(e), tuple(-k for k in e))):
            c = self.terms[e]
            mono = "*".join(
                var_name(i) + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k
            )
            pieces.append(_term_text(c, mono))
        out = pieces[0]
        for p in pieces[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"Poly({self})"


def _term_text(c: CQ, mono: str) -> str:
    if not mono:
        return str(c)
    if c == 1:
        return mono
    if c == -1:
        return "-" + mono
    return f"{c}*{mono}"


def monomials(nvars: int, degree: int) -> Iterable[tuple]:
    """All exponent tuples of total degree exactly ``degree``."""
    if nvars == 0:
        if degree == 0:
            yield ()
        return
    if nvars == 1:
        yield (degree,)
        return
    for k in range(degree, -1, -1):
        for rest in monomials(nvars - 1, degree - k):
            yield (k,) + rest


def format_cq(c: CQ) -> str:
    return str(c) if c.im else format_rational(c.re)
