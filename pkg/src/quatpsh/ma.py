"""Quaternionic Monge-Ampere densities, mass bounds and weak-limit experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import forms
from .fields import Grid, ScalarField, ddj_potential, quat_hessian, quaternion_hessian_arrays, fd_second_partials
from .hherm import HyperhermitianMatrix, moore_det
from .psh import Mollifier
from .quadrature import accurate_sum, graded_breaks, polar_ball_rule, pyramid_box_rule
from .quat import Quaternion

__all__ = [
    "MADensitySample",
    "PairingRecord",
    "MassReport",
    "WeakLimitResult",
    "moore_det_arrays",
    "mixed_det_arrays",
    "ma_density",
    "mixed_ma_density",
    "form_route_density",
    "cln_mass",
    "weak_convergence_experiment",
    "richardson",
    "default_schedule",
]


# vectorised determinants -----------------------------------------------------


def moore_det_arrays(hess: np.ndarray) -> np.ndarray:
    """Moore determinants of (N, n, n, 4) float hyperhermitian matrices."""
    npts, n = hess.shape[0], hess.shape[1]
    if n == 1:
        return hess[:, 0, 0, 0].copy()
    if n == 2:
        q = hess[:, 0, 1, :]
        return hess[:, 0, 0, 0] * hess[:, 1, 1, 0] - np.sum(q * q, axis=1)
    out = np.empty(npts)
    for p in range(npts):
        rows = [[Quaternion(*map(float, hess[p, a, b])) for b in range(n)] for a in range(n)]
        out[p] = moore_det(HyperhermitianMatrix(rows, atol=1e-9))
    return out


def mixed_det_arrays(hess_list: Sequence[np.ndarray]) -> np.ndarray:
    n = hess_list[0].shape[1]
    if len(hess_list) != n:
        raise ValueError("mixed density needs n Hessians")
    total = np.zeros(hess_list[0].shape[0])
    for size in range(1, n + 1):
        for subset in _subsets(n, size):
            acc = sum(hess_list[i] for i in subset)
            total += (-1) ** (n - size) * moore_det_arrays(acc)
    return total / math.factorial(n)


def _subsets(n: int, size: int):
    import itertools

    return itertools.combinations(range(n), size)


# densities -------------------------------------------------------------------


@dataclass
class MADensitySample:
    points: np.ndarray
    values: np.ndarray
    method: str  # symbolic | finite-difference | mollified
    one_sided: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def csv_rows(self) -> list[list]:
        return [[*map(float, p), float(v)] for p, v in zip(self.points, self.values)]


def _hessians(u: ScalarField, pts: np.ndarray, method: str, grid: Grid | None, h: float | None):
    if method == "symbolic":
        second = quat_hessian(u).second_partials_many(pts)
        return quaternion_hessian_arrays(second, u.n), None
    if method == "finite-difference":
        step = h if h is not None else (min(grid.spacing) if grid else 1e-3)
        u.check_guard(pts)
        box = (grid.lo, grid.hi) if grid else None
        second, one_sided = fd_second_partials(u, pts, step, box)
        return quaternion_hessian_arrays(second, u.n), one_sided
    raise ValueError(f"unknown method {method!r}")


def _points(where) -> tuple[np.ndarray, Grid | None]:
    if isinstance(where, Grid):
        return where.points(), where
    return np.atleast_2d(np.asarray(where, dtype=float)), None


def ma_density(u: ScalarField, where, method: str = "symbolic", h: float | None = None) -> MADensitySample:
    """Pointwise Moore determinant of the quaternionic Hessian."""
    pts, grid = _points(where)
    hess, one_sided = _hessians(u, pts, method, grid, h)
    return MADensitySample(pts, moore_det_arrays(hess), method, one_sided)


def mixed_ma_density(us: Sequence[ScalarField], where, method: str = "symbolic", h: float | None = None) -> MADensitySample:
    pts, grid = _points(where)
    n = us[0].n
    if len(us) != n or any(u.n != n for u in us):
        raise ValueError("mixed density needs n fields on H^n")
    hs, flags = [], None
    for u in us:
        hess, fl = _hessians(u, pts, method, grid, h)
        hs.append(hess)
        flags = fl if flags is None else (flags | fl if fl is not None else flags)
    return MADensitySample(pts, mixed_det_arrays(hs), method, flags)


def form_route_density(u: ScalarField):
    """``4^n / n! * (del del_J u)^n / (dz_1 ^ ... ^ dz_2n)`` as an exact polynomial."""
    n = u.n
    omega = ddj_potential(u)
    top = forms.top_ratio(omega**n)  # coefficient / n!
    return top.scale(Fraction(4**n))


# mass experiments ---------------------------------------------------------------


@dataclass
class MassReport:
    K: tuple
    K_tilde: tuple
    mass: float
    sup_norms: list
    sup_product: float
    eps: float | None = None

    @property
    def ratio(self) -> float:
        return self.mass / self.sup_product if self.sup_product else math.inf

    def to_json(self) -> dict:
        return {
            "K": [list(map(float, b)) for b in self.K],
            "K_tilde": [list(map(float, b)) for b in self.K_tilde],
            "eps": self.eps,
            "mass": self.mass,
            "sup_norms": self.sup_norms,
            "sup_product": self.sup_product,
            "ratio": self.ratio,
        }


class MollifiedDensity:
    """Mixed Monge-Ampere density of mollified fields at arbitrary points."""

    def __init__(self, us: Sequence[ScalarField], eps: float | None, mollifier: Mollifier | None = None):
        self.us = list(us)
        self.n = self.us[0].n
        self.eps = eps
        self.mollifier = mollifier or (Mollifier(self.n) if eps else None)

    def hessians(self, u: ScalarField, pts: np.ndarray) -> np.ndarray:
        if self.eps is None:
            return quaternion_hessian_arrays(quat_hessian(u).second_partials_many(pts), self.n)
        return self.mollifier.hessians(u, pts, self.eps)

    def density(self, pts: np.ndarray) -> np.ndarray:
        cache: dict = {}
        for u in self.us:
            if id(u) not in cache:
                cache[id(u)] = self.hessians(u, pts)
        return mixed_det_arrays([cache[id(u)] for u in self.us])

    def values(self, u: ScalarField, pts: np.ndarray) -> np.ndarray:
        if self.eps is None:
            return u.evaluate_many(pts, check=False)
        return self.mollifier.values(u, pts, self.eps)


def _box(b) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = (np.asarray(v, dtype=float) for v in b)
    if lo.shape != hi.shape or np.any(hi <= lo):
        raise ValueError("boxes are (lo, hi) with hi > lo per axis")
    return lo, hi


def cln_mass(
    us: Sequence[ScalarField],
    K,
    K_tilde,
    sup_samples: int = 5,
    eps: float | None = None,
    mollifier: Mollifier | None = None,
    center=None,
    face_order: int = 4,
    per_panel: int = 5,
) -> MassReport:
    """L1(K) mass of the mixed density and the product of sup-norms over K~.

    Mass quadrature splits K into pyramids with apex ``center`` (default the
    box centre) and grades the radial panels towards the apex.  Sup-norms
    are maxima over a tensor grid with ``sup_samples`` points per axis.
    """
    lo, hi = _box(K)
    tlo, thi = _box(K_tilde)
    if np.any(lo <= tlo) or np.any(hi >= thi):
        raise ValueError("K must lie strictly inside K~")
    apex = 0.5 * (lo + hi) if center is None else np.asarray(center, dtype=float)
    dens = MollifiedDensity(us, eps, mollifier)
    fine = 0.25 * (eps if eps else 0.05) / float(np.min(hi - lo))
    pts, wts = pyramid_box_rule(lo, hi, apex, face_order, graded_breaks(1.0, fine), per_panel)
    mass = accurate_sum(wts * np.abs(dens.density(pts)))
    grid = Grid(tuple(tlo), tuple(thi), (sup_samples,) * len(tlo))
    gpts = grid.points()
    sups = [float(np.max(np.abs(dens.values(u, gpts)))) for u in us]
    return MassReport((tuple(lo), tuple(hi)), (tuple(tlo), tuple(thi)), mass, sups, float(np.prod(sups)), eps)


# weak convergence ------------------------------------------------------------------


@dataclass
class PairingRecord:
    eps: float
    pairing: float
    error_estimate: float


@dataclass
class WeakLimitResult:
    records: list
    limit: float
    limit_error: float
    observed_order: float | None
    label: str = ""

    def csv_rows(self) -> list[list]:
        return [[r.eps, r.pairing, r.error_estimate] for r in self.records]

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "records": [{"eps": r.eps, "pairing": r.pairing, "error_estimate": r.error_estimate} for r in self.records],
            "limit": self.limit,
            "limit_error": self.limit_error,
            "observed_order": self.observed_order,
        }


def default_schedule(eps0: float = 0.5, levels: int = 7) -> list[float]:
    return [eps0 * 2.0**-k for k in range(levels)]


def _extrapolate(v: Sequence[float], ratio: float, order_bounds) -> tuple[float, float | None, float]:
    """Limit and order from three consecutive values; also the correction size."""
    d1, d2 = v[1] - v[0], v[2] - v[1]
    if d2 == 0:
        return v[2], None, 0.0
    order = math.log(abs(d1 / d2), ratio) if d1 != 0 else order_bounds[1]
    order = min(max(order, order_bounds[0]), order_bounds[1])
    correction = d2 / (ratio**order - 1)
    return v[2] + correction, order, abs(correction)


def richardson(eps: Sequence[float], values: Sequence[float], order_bounds=(1.0, 4.0)):
    """Extrapolate ``values(eps) -> eps = 0`` assuming a geometric schedule.

    Returns (limit, error estimate, observed order).  The estimate is the
    change against the extrapolation from the preceding triple, or the
    size of the correction when only three values exist.
    """
    if len(values) < 3:
        return float(values[-1]), float("nan"), None
    v = [float(x) for x in values]
    ratio = eps[-2] / eps[-1]
    limit, order, correction = _extrapolate(v[-3:], ratio, order_bounds)
    if len(v) == 3:
        return limit, correction, order
    previous, _, _ = _extrapolate(v[-4:-1], eps[-3] / eps[-2], order_bounds)
    return limit, abs(limit - previous), order


def weak_convergence_experiment(
    u: ScalarField,
    phi: ScalarField | None,
    schedule: Sequence[float] | None = None,
    radius: float = 1.0,
    center=None,
    mollifier: Mollifier | None = None,
    angular_order: int = 6,
    per_panel: int = 6,
    check_support: bool = True,
    label: str = "",
) -> WeakLimitResult:
    """Pairings of ``det(D2 u_eps)`` with ``phi`` on the ball ``B(center, radius)``.

    ``phi = None`` pairs with the indicator of the ball (total mass).
    Each pairing's error estimate is its distance to a coarser polar rule.
    """
    dim = u.nvars
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    schedule = list(schedule or default_schedule())
    if sorted(schedule, reverse=True) != schedule:
        raise ValueError("the schedule must be decreasing")
    if phi is not None and check_support:
        _check_support(phi, c, radius)
    moll = mollifier or Mollifier(u.n)
    records = []
    for eps in schedule:
        vals = []
        for order, pp in ((angular_order, per_panel), (max(2, angular_order - 2), max(2, per_panel - 2))):
            breaks = graded_breaks(radius, eps / 4)
            pts, wts = polar_ball_rule(c, radius, order, breaks, pp)
            dens = MollifiedDensity([u], eps, moll).density(pts)
            weight = wts if phi is None else wts * _phi_values(phi, pts)
            vals.append(accurate_sum(weight * dens))
        records.append(PairingRecord(eps, vals[0], abs(vals[0] - vals[1])))
    limit, err, order = richardson([r.eps for r in records], [r.pairing for r in records])
    quad_err = max(r.error_estimate for r in records[-2:])
    return WeakLimitResult(records, limit, err + quad_err, order, label)


def _phi_values(phi: ScalarField, pts: np.ndarray) -> np.ndarray:
    vals = phi.evaluate_many(pts, check=False)
    return np.where(np.isfinite(vals), vals, 0.0)


def _check_support(phi: ScalarField, center: np.ndarray, radius: float, tol: float = 1e-9):
    from .quadrature import sphere_rule

    dirs, _ = sphere_rule(len(center), 6)
    rim = center + radius * np.asarray(dirs)
    vals = _phi_values(phi, rim)
    if np.max(np.abs(vals)) > tol:
        raise ValueError(
            f"test function does not vanish on the boundary of the pairing ball (max {np.max(np.abs(vals)):.3g})"
        )
