"""Quaternionic Hermitian metrics, HKT checks and the inverse potential solver.

A metric is a symmetric ``4n x 4n`` matrix of real polynomials in the real
coordinates.  Its fundamental (2,0)-form is ``omega_J - i omega_K`` with
``omega_L(A, B) = g(A, B*L)``.  That form equals ``OMEGA_NORMALIZATION``
times ``t_inv(g)``, so for ``g = t(del del_J f)`` it returns
``OMEGA_NORMALIZATION * del del_J f``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import forms, linalg
from .fields import ScalarField, ddj_potential, quat_hessian
from .forms import Form, _letter_rows, _letter_rows_inv
from .hherm import positivity
from .poly import Poly, monomials
from .quat import Quaternion, right_action_matrix
from .scalars import CQ, IUNIT

__all__ = [
    "OMEGA_NORMALIZATION",
    "MetricField",
    "NotStrictlyPsh",
    "NotClosed",
    "DegreeBoundTooSmall",
    "metric_from_omega",
    "metric_from_potential",
    "omega_from_metric",
    "is_quaternionic_hermitian",
    "is_hkt",
    "solve_potential",
]

# omega_J - i omega_K = OMEGA_NORMALIZATION * t_inv(g)
OMEGA_NORMALIZATION = Fraction(-1)

_UNITS = {"I": Quaternion(0, 1), "J": Quaternion(0, 0, 1), "K": Quaternion(0, 0, 0, 1)}


class NotStrictlyPsh(ValueError):
    def __init__(self, point, certificate):
        super().__init__(f"potential is not strictly psh at {[str(v) for v in point]}")
        self.point = point
        self.certificate = certificate


class NotClosed(ValueError):
    def __init__(self, residual: Form):
        super().__init__(f"form is not del-closed; residual {residual}")
        self.residual = residual


class DegreeBoundTooSmall(ValueError):
    def __init__(self, degree: int):
        super().__init__(f"no potential of degree <= {degree}; retry with a larger bound")
        self.degree = degree


@dataclass
class MetricField:
    """Symmetric matrix field of real polynomials in the real coordinates."""

    n: int
    entries: list

    def __post_init__(self):
        size = 4 * self.n
        if len(self.entries) != size or any(len(r) != size for r in self.entries):
            raise ValueError(f"metric needs {size}x{size} entries")
        self.entries = [[_as_poly(v, size) for v in row] for row in self.entries]
        for r in range(size):
            for s in range(r):
                if self.entries[r][s] != self.entries[s][r]:
                    raise ValueError(f"metric is not symmetric at ({r}, {s})")
        if not all(v.is_real() for row in self.entries for v in row):
            raise ValueError("metric entries must be real polynomials")

    @classmethod
    def constant(cls, rows: Sequence[Sequence]) -> "MetricField":
        return cls(len(rows) // 4, [list(r) for r in rows])

    def is_polynomial(self) -> bool:
        return True

    def evaluate(self, point: Sequence) -> list[list]:
        out = []
        for row in self.entries:
            vals = [v.evaluate(point) for v in row]
            out.append([v.re if isinstance(v, CQ) else complex(v).real for v in vals])
        return out

    def is_positive_definite_at(self, point: Sequence) -> bool:
        m = self.evaluate(point)
        if all(isinstance(v, Fraction) for row in m for v in row):
            return all(v > 0 for v in linalg.congruence_diagonalize(m)[0])
        return bool(np.linalg.eigvalsh(np.array(m, dtype=float))[0] > 0)

    def to_json(self) -> dict:
        return {"n": self.n, "entries": [[str(v) for v in row] for row in self.entries]}


def _as_poly(v, nvars: int) -> Poly:
    if isinstance(v, Poly):
        if v.nvars != nvars:
            raise ValueError("metric entry has the wrong number of variables")
        return v
    return Poly.const(nvars, v)


# t and its inverse at the level of fields ------------------------------------


@lru_cache(maxsize=None)
def _t_weights(n: int) -> dict:
    """For each letter pair (k, l): the real symmetric matrix t(dz_k ^ dz_l)."""
    size = 4 * n
    p = _letter_rows(n)
    rj = right_action_matrix(_UNITS["J"], n).rows
    out = {}
    for k in range(size):
        for l in range(k + 1, size):
            # bilinear form of the unit 2-form, then X -> (X, X*j)
            bil = [[p[k][r] * p[l][s] - p[l][r] * p[k][s] for s in range(size)] for r in range(size)]
            m = [[sum((bil[r][c] * rj[c][s] for c in range(size)), CQ(0)) for s in range(size)] for r in range(size)]
            out[(k, l)] = tuple(tuple((m[r][s] + m[s][r]) * Fraction(1, 2) for s in range(size)) for r in range(size))
    return out


@lru_cache(maxsize=None)
def _omega_weights(n: int) -> dict:
    """For each letter pair (k, l) the list of (r, s, weight) with
    ``Omega_kl = sum weight * g_rs``."""
    size = 4 * n
    pinv = _letter_rows_inv(n)
    rj = right_action_matrix(_UNITS["J"], n).rows
    rk = right_action_matrix(_UNITS["K"], n).rows
    m = [[CQ.coerce(rj[r][s]) - IUNIT * rk[r][s] for s in range(size)] for r in range(size)]
    mp = linalg.matmul(m, pinv)
    out = {}
    for k in range(size):
        for l in range(k + 1, size):
            terms = []
            for r in range(size):
                for s in range(size):
                    w = (pinv[r][k] * mp[s][l] - pinv[r][l] * mp[s][k]) * Fraction(1, 2)
                    if w:
                        terms.append((r, s, w))
            out[(k, l)] = terms
    return out


def metric_from_omega(omega: Form) -> MetricField:
    """Field version of ``t``: the metric whose pointwise t-image is ``omega``."""
    n = omega.n
    size = 4 * n
    if omega and not omega.has_bidegree(2, 0):
        raise ValueError("expected a (2,0)-form")
    weights = _t_weights(n)
    acc = [[Poly.zero(size) for _ in range(size)] for _ in range(size)]
    for (k, l), c in omega.terms.items():
        w = weights[(k, l)]
        for r in range(size):
            for s in range(size):
                if w[r][s]:
                    acc[r][s] = acc[r][s] + c.scale(w[r][s])
    if not all(v.is_real() for row in acc for v in row):
        raise ValueError("form is not real")
    return MetricField(n, [[v.real_part() for v in row] for row in acc])


def omega_from_metric(g: MetricField) -> Form:
    """``omega_J - i omega_K`` of a quaternionic Hermitian metric."""
    ok, witness = is_quaternionic_hermitian(g)
    if not ok:
        raise ValueError(f"metric is not quaternionic Hermitian: {witness}")
    size = 4 * g.n
    terms = {}
    for word, ws in _omega_weights(g.n).items():
        acc = Poly.zero(size)
        for r, s, w in ws:
            if g.entries[r][s]:
                acc = acc + g.entries[r][s].scale(w)
        if acc:
            terms[word] = acc
    return Form(g.n, terms)


def metric_from_potential(f: ScalarField, samples: Sequence[Sequence] | None = None, count: int = 8, seed: int = 0) -> MetricField:
    """``g = t(del del_J f)`` after checking strict positivity of ``D2 f`` at samples.

    Default samples are the origin plus ``count`` seeded rational points in
    the unit box.
    """
    if not f.is_polynomial():
        raise ValueError("metric_from_potential needs a polynomial potential")
    if samples is None:
        rng = random.Random(seed)
        samples = [[Fraction(0)] * f.nvars] + [
            [Fraction(rng.randint(-4, 4), 4) for _ in range(f.nvars)] for _ in range(count)
        ]
    hess = quat_hessian(f)
    for point in samples:
        cert = positivity(hess.evaluate(point))
        if cert.verdict != "positive-definite":
            raise NotStrictlyPsh(point, cert)
    return metric_from_omega(ddj_potential(f))


# checks ------------------------------------------------------------------------


def is_quaternionic_hermitian(g: MetricField, samples: Sequence[Sequence] | None = None):
    """Whether ``g(A*L, B*L) = g(A, B)`` for L in I, J, K.

    Without samples the check is an exact polynomial identity.  Returns
    ``(ok, witness)`` with witness ``{"basis": (r, s), "L": ..., "point": ...}``.
    """
    size = 4 * g.n
    for name, unit in _UNITS.items():
        rl = right_action_matrix(unit, g.n).rows
        # (R^T G R)[r][s]; R is a signed permutation
        perm = {c: (r, v) for c in range(size) for r in range(size) if (v := rl[r][c])}
        if samples is None:
            mats = [(None, g.entries)]
        else:
            mats = [(p, g.evaluate(p)) for p in samples]
        for point, m in mats:
            for r in range(size):
                for s in range(size):
                    (pr, vr), (ps, vs) = perm[r], perm[s]
                    lhs = m[pr][ps] if vr * vs == 1 else -m[pr][ps]
                    if lhs != m[r][s]:
                        witness = {"basis": (r, s), "L": name}
                        if point is not None:
                            witness["point"] = [str(v) for v in point]
                        return False, witness
    return True, None


def is_hkt(g: MetricField) -> tuple[bool, Form]:
    """``(del Omega == 0, del Omega)`` computed symbolically."""
    residual = forms.del_(omega_from_metric(g))
    return residual.is_zero(), residual


# inverse problem ----------------------------------------------------------------


@lru_cache(maxsize=None)
def _ddj_columns(n: int, degree: int) -> tuple:
    cols = []
    nv = 4 * n
    for exps in monomials(nv, degree):
        mono = Poly._raw(nv, {exps: CQ(1)})
        cols.append((exps, forms.del_(forms.del_J(Form.scalar(n, mono)))))
    return tuple(cols)


def solve_potential(omega: Form, degree: int) -> ScalarField:
    """A real polynomial ``f`` of degree <= ``degree`` with ``del del_J f = omega``.

    Each homogeneous degree ``d`` of ``f`` is solved separately against the
    degree ``d - 2`` part of the coefficients, as an exact rational system;
    free unknowns are set to zero and affine terms are omitted.
    """
    n = omega.n
    nv = 4 * n
    if omega and not omega.has_bidegree(2, 0):
        raise ValueError("expected a (2,0)-form")
    if not forms.is_real(omega):
        raise ValueError("form is not real")
    residual = forms.del_(omega)
    if residual:
        raise NotClosed(residual)
    top = max((c.degree() for c in omega.terms.values()), default=-1)
    if top > degree - 2:
        raise DegreeBoundTooSmall(degree)
    result = Poly.zero(nv)
    for d in range(2, degree + 1):
        target = {w: c.homogeneous_part(d - 2) for w, c in omega.terms.items()}
        target = {w: c for w, c in target.items() if c}
        if not target:
            continue
        cols = _ddj_columns(n, d)
        rows: dict = {}
        for j, (_, img) in enumerate(cols):
            for w, c in img.terms.items():
                for e, v in c.terms.items():
                    for part, val in ((0, v.re), (1, v.im)):
                        if val:
                            rows.setdefault((w, e, part), {})[j] = val
        rhs_map = {}
        for w, c in target.items():
            for e, v in c.terms.items():
                for part, val in ((0, v.re), (1, v.im)):
                    if val:
                        rhs_map[(w, e, part)] = val
        keys = sorted(set(rows) | set(rhs_map))
        sol = linalg.solve_sparse([rows.get(k, {}) for k in keys], [rhs_map.get(k, Fraction(0)) for k in keys], len(cols))
        if sol is None:
            raise DegreeBoundTooSmall(degree)
        result = result + Poly(nv, {cols[j][0]: CQ(v) for j, v in enumerate(sol) if v})
    f = ScalarField.from_poly(result) if result else ScalarField.constant(0, n)
    if ddj_potential(f) != omega:
        raise ArithmeticError("potential failed verification by substitution")
    return f
