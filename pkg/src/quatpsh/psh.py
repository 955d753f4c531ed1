"""Plurisubharmonicity tests, the p-norm maximum and mollification."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .fields import Grid, GuardViolation, ScalarField, quat_hessian, quaternion_hessian_arrays
from .hherm import positivity
from .quadrature import polar_ball_rule, sphere_rule
from .quat import Quaternion, left_mult_block, BASIS

__all__ = [
    "PshVerdict",
    "QuaternionicLine",
    "is_psh_c2",
    "hessian_verdict",
    "line_subharmonic_test",
    "lines_test",
    "sphere_directions",
    "pnorm_max",
    "Mollifier",
    "MollifiedSamples",
    "mollify",
]


@dataclass
class PshVerdict:
    verdict: str  # psh | strictly-psh | not-psh | inconclusive
    evidence: dict = field(default_factory=dict)
    sample_relative: bool = True

    @property
    def is_psh(self) -> bool:
        return self.verdict in ("psh", "strictly-psh")

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "evidence": _jsonable(self.evidence)}
        if self.verdict in ("psh", "strictly-psh"):
            out["scope"] = "on the sampled set"
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, Quaternion):
        return obj.to_json()
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return obj


# C^2 criterion -----------------------------------------------------------------

_LEFT = np.array([np.array(left_mult_block(q), dtype=float) for q in BASIS])  # (4, 4, 4)


def realize_arrays(hess: np.ndarray) -> np.ndarray:
    """(N, n, n, 4) quaternion matrices -> (N, 4n, 4n) real realizations."""
    npts, n = hess.shape[0], hess.shape[1]
    blocks = np.einsum("pabc,cij->paibj", hess, _LEFT)
    return blocks.reshape(npts, 4 * n, 4 * n)


def hessian_verdict(points: np.ndarray, hess: np.ndarray, tol: float = 1e-9, margin: float = 1e-8) -> PshVerdict:
    """Verdict from sampled quaternionic Hessians (N, n, n, 4)."""
    real = realize_arrays(hess)
    real = 0.5 * (real + np.transpose(real, (0, 2, 1)))
    eig = np.linalg.eigvalsh(real)
    lows = eig[:, 0]
    worst = int(np.argmin(lows))
    evidence = {
        "samples": int(len(points)),
        "min_eigenvalue": float(lows[worst]),
        "worst_point": np.asarray(points[worst], dtype=float).tolist(),
        "worst_hessian": hess[worst].tolist(),
    }
    if lows[worst] < -tol:
        vals, vecs = np.linalg.eigh(real[worst])
        evidence["negative_direction"] = vecs[:, 0].tolist()
        return PshVerdict("not-psh", evidence)
    if lows[worst] >= margin:
        return PshVerdict("strictly-psh", evidence)
    return PshVerdict("psh", evidence)


def _sample_points(samples) -> tuple[list, bool]:
    if isinstance(samples, Grid):
        return samples.points(), False
    pts = list(samples)
    exact = all(not isinstance(v, float) and not isinstance(v, np.floating) for p in pts for v in p)
    return pts, exact


def is_psh_c2(f: ScalarField, samples, tol: float = 1e-9, margin: float = 1e-8, exact: bool | None = None) -> PshVerdict:
    """Positive semidefiniteness of the quaternionic Hessian at every sample.

    Rational sample points on a polynomial field are decided exactly; the
    strictness margin is then any positive value.
    """
    pts, rational = _sample_points(samples)
    hess_field = quat_hessian(f)
    use_exact = f.is_polynomial() and rational if exact is None else exact
    if use_exact:
        worst = None
        strict = True
        for p in pts:
            h = hess_field.evaluate(p)
            cert = positivity(h)
            if cert.verdict == "indefinite":
                return PshVerdict(
                    "not-psh",
                    {"point": [str(Fraction(v)) for v in p], "hessian": h.to_json(), "certificate": cert.to_json()},
                )
            if cert.verdict != "positive-definite":
                strict = False
                worst = worst or (p, h)
        evidence = {"samples": len(pts), "exact": True}
        if worst is not None:
            evidence["semidefinite_point"] = [str(Fraction(v)) for v in worst[0]]
        return PshVerdict("strictly-psh" if strict else "psh", evidence)
    arr = np.asarray(pts, dtype=float)
    second = hess_field.second_partials_many(arr)
    return hessian_verdict(arr, quaternion_hessian_arrays(second, f.n), tol, margin)


# quaternionic lines ------------------------------------------------------------


@dataclass(frozen=True)
class QuaternionicLine:
    """The map ``q -> base + direction * q`` from H into H^n."""

    base: tuple
    direction: tuple

    def __post_init__(self):
        base = tuple(Quaternion.coerce(q) for q in self.base)
        direction = tuple(Quaternion.coerce(q) for q in self.direction)
        if len(base) != len(direction):
            raise ValueError("base and direction need the same length")
        if all(q.is_zero() for q in direction):
            raise ValueError("a quaternionic line needs a nonzero direction")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "direction", direction)

    @property
    def n(self) -> int:
        return len(self.base)

    def points(self, params: np.ndarray) -> np.ndarray:
        """Real coordinates of ``base + direction * q`` for each row ``q`` of ``params``."""
        params = np.atleast_2d(params)
        out = np.empty((len(params), 4 * self.n))
        for m, (a, xi) in enumerate(zip(self.base, self.direction)):
            right = np.array(
                [[float(v) for v in (xi * e).components] for e in BASIS]
            )  # row e: xi*e
            out[:, 4 * m : 4 * m + 4] = np.array([float(v) for v in a]) + params @ right
        return out

    def to_json(self) -> dict:
        return {"base": [q.to_json() for q in self.base], "direction": [q.to_json() for q in self.direction]}


def _evaluate_continuous(u: ScalarField, pts: np.ndarray) -> np.ndarray:
    vals = u.evaluate_many(pts, check=False)
    bad = ~np.isfinite(vals)
    if bad.any():
        raise GuardViolation("field undefined at sampled points", pts[bad][:10].tolist())
    return vals


def line_subharmonic_test(
    u: ScalarField,
    line: QuaternionicLine,
    radii: Sequence[float],
    order: int = 16,
    tol: float = 1e-9,
    box: tuple | None = None,
) -> PshVerdict:
    """Sub-mean-value inequality of ``q -> u(base + direction*q)`` on 3-spheres.

    The error estimate compares the product rule of ``order`` with the
    rule of half that order.
    """
    if u.n != line.n:
        raise ValueError("line and field live in different H^n")
    center_val = float(_evaluate_continuous(u, line.points(np.zeros((1, 4))))[0])
    dirs, wts = sphere_rule(4, order)
    dirs_lo, wts_lo = sphere_rule(4, max(2, order // 2))
    records = []
    for r in radii:
        if r <= 0:
            raise ValueError("radii must be positive")
        pts = line.points(r * np.asarray(dirs))
        if box is not None:
            lo, hi = (np.asarray(b, dtype=float) for b in box)
            if np.any(pts < lo - 1e-12) or np.any(pts > hi + 1e-12):
                raise ValueError(f"radius {r} leaves the working box")
        mean = float(np.dot(wts, _evaluate_continuous(u, pts)))
        mean_lo = float(np.dot(wts_lo, _evaluate_continuous(u, line.points(r * np.asarray(dirs_lo)))))
        err = abs(mean - mean_lo)
        slack = mean - center_val
        records.append({"radius": float(r), "mean": mean, "slack": slack, "error_estimate": err})
        if slack < -(tol + err):
            return PshVerdict("not-psh", {"line": line.to_json(), "center_value": center_val, "failure": records[-1], "records": records})
    return PshVerdict("psh", {"line": line.to_json(), "center_value": center_val, "records": records})


def sphere_directions(n: int, count: int, seed: int) -> list[tuple[Quaternion, ...]]:
    """Deterministic low-discrepancy unit directions in H^n (scrambled Sobol)."""
    from scipy.stats import norm, qmc

    sampler = qmc.Sobol(d=4 * n, scramble=True, seed=seed)
    with warnings.catch_warnings():
        # counts need not be powers of two; balance is not required here
        warnings.simplefilter("ignore", UserWarning)
        u = sampler.random(count)
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return [tuple(Quaternion(*map(float, row[4 * m : 4 * m + 4])) for m in range(n)) for row in g]


def lines_test(
    u: ScalarField,
    base_points: Sequence[Sequence],
    count: int,
    seed: int,
    radii: Sequence[float],
    order: int = 16,
    tol: float = 1e-9,
) -> PshVerdict:
    """Line test over ``count`` seeded directions through each base point."""
    n = u.n
    directions = sphere_directions(n, count, seed)
    checked = 0
    for base in base_points:
        base_q = tuple(Quaternion(*map(float, base[4 * m : 4 * m + 4])) for m in range(n))
        for xi in directions:
            v = line_subharmonic_test(u, QuaternionicLine(base_q, xi), radii, order, tol)
            checked += 1
            if v.verdict == "not-psh":
                v.evidence["lines_checked"] = checked
                return v
    return PshVerdict("psh", {"lines_checked": checked, "seed": seed, "radii": list(map(float, radii))})


# p-norm maximum ------------------------------------------------------------------


def pnorm_max(f: ScalarField, g: ScalarField, p, samples=None) -> ScalarField:
    """``(f^p + g^p)^(1/p)``; positivity of f and g is checked on ``samples``."""
    p = Fraction(p)
    if p < 1:
        raise ValueError("pnorm_max needs p >= 1")
    if samples is not None:
        pts = samples.points() if isinstance(samples, Grid) else np.asarray(samples, dtype=float)
        for name, h in (("f", f), ("g", g)):
            vals = h.evaluate_many(pts, check=False)
            if np.any(~(vals > 0)):
                bad = pts[~(vals > 0)][:10].tolist()
                raise GuardViolation(f"{name} is not positive on the sampled domain", bad)
    return (f**p + g**p) ** (1 / p)


# mollification ---------------------------------------------------------------------


BUMP_TEXT = "exp(-1/(1 - ({})))"


class Mollifier:
    """Convolution with ``c * exp(-1/(1-|w|^2))`` scaled to radius ``eps``.

    The kernel and its second partials come from the symbolic field on a
    polar ball rule with radial panels packed towards the rim, where the
    bump's derivatives are steep.  The constant ``c`` makes the discrete
    kernel mass exactly 1, and the constant moment of each second-partial
    kernel is projected out so that constants have zero Hessian exactly.
    """

    def __init__(self, n: int, angular_order: int = 6, radial_breaks=(0.0, 0.5, 0.8, 0.95, 1.0), per_panel: int = 8):
        from .fields import parse_field

        self.n = n
        dim = 4 * n
        sq = " + ".join(f"{a}{b}^2" for b in range(1, n + 1) for a in "txyz")
        bump = parse_field(BUMP_TEXT.format(sq), n)
        nodes, wts = polar_ball_rule(np.zeros(dim), 1.0, angular_order, list(radial_breaks), per_panel)
        rho = bump.evaluate_many(nodes, check=False)
        mass = float(np.dot(wts, rho))
        self.nodes = nodes
        self.weights = wts * rho / mass
        second = quat_hessian(bump).second_partials_many(nodes, check=False)
        sw = (wts / mass)[:, None, None] * second  # (K, d, d)
        self.second_weights = sw - sw.sum(axis=0)[None, :, :] * self.weights[:, None, None]
        self.dim = dim

    def _field_values(self, u: ScalarField, x: np.ndarray, eps: float) -> np.ndarray:
        pts = (x[:, None, :] - eps * self.nodes[None, :, :]).reshape(-1, self.dim)
        return _evaluate_continuous(u, pts).reshape(len(x), len(self.nodes))

    def values(self, u: ScalarField, points: np.ndarray, eps: float, chunk: int = 128) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty(len(pts))
        for s in range(0, len(pts), chunk):
            out[s : s + chunk] = self._field_values(u, pts[s : s + chunk], eps) @ self.weights
        return out

    def second_partials(self, u: ScalarField, points: np.ndarray, eps: float, chunk: int = 128) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.empty((len(pts), self.dim, self.dim))
        flat = self.second_weights.reshape(len(self.nodes), -1)
        for s in range(0, len(pts), chunk):
            vals = self._field_values(u, pts[s : s + chunk], eps)
            out[s : s + chunk] = (vals @ flat).reshape(-1, self.dim, self.dim) / eps**2
        return out

    def hessians(self, u: ScalarField, points: np.ndarray, eps: float) -> np.ndarray:
        return quaternion_hessian_arrays(self.second_partials(u, points, eps), self.n)


@dataclass
class MollifiedSamples:
    eps: float
    points: np.ndarray
    values: np.ndarray
    original: np.ndarray
    interior: np.ndarray
    hessians: np.ndarray | None = None

    @property
    def sup_distance(self) -> float:
        if not self.interior.any():
            return 0.0
        return float(np.max(np.abs(self.values - self.original)[self.interior]))

    def psh_verdict(self, tol: float = 1e-9) -> PshVerdict:
        if self.hessians is None:
            raise ValueError("mollify(..., with_hessian=True) is needed for a verdict")
        mask = self.interior
        return hessian_verdict(self.points[mask], self.hessians[mask], tol=tol)


def mollify(
    u: ScalarField,
    eps: float,
    grid: Grid,
    with_hessian: bool = False,
    mollifier: Mollifier | None = None,
) -> MollifiedSamples:
    """Gridded ``u * rho_eps``; interior points lie at least ``eps`` inside the box."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if grid.dim != u.nvars:
        raise ValueError("grid dimension does not match the field")
    widths = np.array(grid.hi) - np.array(grid.lo)
    if np.any(widths <= 2 * eps):
        raise ValueError("box too small for the mollification radius")
    moll = mollifier or Mollifier(u.n)
    pts = grid.points()
    interior = grid.interior_mask(margin=eps)
    vals = moll.values(u, pts, eps)
    orig = _evaluate_continuous(u, pts)
    hess = moll.hessians(u, pts, eps) if with_hessian else None
    return MollifiedSamples(eps, pts, vals, orig, interior, hess)
