"""Product quadrature rules on spheres, balls and boxes in R^d.

Spheres use hyperspherical angles: each polar angle with weight
``sin^m`` becomes a Gauss-Gegenbauer rule in its cosine, the azimuth a
periodic trapezoid rule.  Weights are normalised to average, so constants
integrate to 1 on the sphere.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_gegenbauer, roots_legendre


@lru_cache(maxsize=None)
def sphere_rule(dim: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (N, dim) on the unit sphere S^{dim-1} and averaging weights (N,)."""
    if dim < 2:
        raise ValueError("spheres need dimension >= 2")
    phi = 2 * np.pi * (np.arange(order) + 0.5) / order
    pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    wts = np.full(order, 1.0 / order)
    # grow from S^1 to S^{dim-1}: new polar angle with weight sin^{k-1}
    for k in range(2, dim):
        alpha = (k - 1) / 2.0
        if alpha == 0.5:
            s, w = roots_legendre(order)
        else:
            s, w = roots_gegenbauer(order, alpha)
        w = w / w.sum()
        radial = np.sqrt(np.clip(1 - s**2, 0.0, None))
        new_pts = np.concatenate(
            [
                np.repeat(s, len(pts))[:, None],
                (radial[:, None, None] * pts[None, :, :]).reshape(-1, pts.shape[1]),
            ],
            axis=1,
        )
        wts = (w[:, None] * wts[None, :]).ravel()
        pts = new_pts
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def sphere_area(dim: int) -> float:
    from math import gamma, pi

    return 2 * pi ** (dim / 2) / gamma(dim / 2)


def gauss_panels(breaks, per_panel: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights over consecutive breakpoints."""
    x0, w0 = roots_legendre(per_panel)
    xs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        xs.append(0.5 * (b - a) * x0 + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * w0)
    return np.concatenate(xs), np.concatenate(ws)


def graded_breaks(r_max: float, fine: float, ratio: float = 2.0) -> list[float]:
    """Radii 0, fine, ratio*fine, ... up to r_max (for integrands varying near 0)."""
    breaks = [0.0]
    r = min(fine, r_max)
    while r < r_max:
        breaks.append(r)
        r *= ratio
    breaks.append(r_max)
    return breaks


def ball_rule(dim: int, angular_order: int, radial_order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes in the open unit ball of R^dim with volume weights."""
    dirs, dw = sphere_rule(dim, angular_order)
    s, sw = roots_legendre(radial_order)
    s = 0.5 * (s + 1)
    sw = 0.5 * sw * s ** (dim - 1) * sphere_area(dim)
    pts = (s[:, None, None] * dirs[None, :, :]).reshape(-1, dim)
    wts = (sw[:, None] * dw[None, :]).ravel()
    return pts, wts


def polar_ball_rule(
    center, radius: float, angular_order: int, breaks, per_panel: int
) -> tuple[np.ndarray, np.ndarray]:
    """Polar rule on the ball ``B(center, radius)`` with radial panels at ``breaks``."""
    center = np.asarray(center, dtype=float)
    dim = len(center)
    dirs, dw = sphere_rule(dim, angular_order)
    r, rw = gauss_panels([b for b in breaks if b <= radius] + ([radius] if breaks[-1] < radius else []), per_panel)
    rw = rw * r ** (dim - 1) * sphere_area(dim)
    pts = center + (r[:, None, None] * dirs[None, :, :]).reshape(-1, dim)
    wts = (rw[:, None] * dw[None, :]).ravel()
    return pts, wts


def pyramid_box_rule(
    lo, hi, center, face_order: int, radial_breaks, per_panel: int
) -> tuple[np.ndarray, np.ndarray]:
    """Rule on a box split into pyramids with apex ``center``.

    A face point ``y`` and ``s in (0, 1)`` map to ``center + s (y - center)``;
    the Jacobian is ``s^{d-1}`` times the distance from the apex to the face
    plane.  ``radial_breaks`` are fractions of the way to the face, so a
    graded list resolves integrands concentrated near the apex.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    c = np.asarray(center, dtype=float)
    dim = len(lo)
    if np.any(c <= lo) or np.any(c >= hi):
        raise ValueError("pyramid apex must lie inside the box")
    g, gw = roots_legendre(face_order)
    s, sw = gauss_panels(radial_breaks, per_panel)
    sw = sw * s ** (dim - 1)
    pts_all, w_all = [], []
    for axis in range(dim):
        for side, plane in ((0, lo[axis]), (1, hi[axis])):
            others = [k for k in range(dim) if k != axis]
            grids = np.meshgrid(*([g] * (dim - 1)), indexing="ij")
            wgrid = np.ones_like(grids[0]) if dim > 1 else np.ones(1)
            face = np.empty((grids[0].size, dim))
            face[:, axis] = plane
            for k, ax in enumerate(others):
                half = 0.5 * (hi[ax] - lo[ax])
                face[:, ax] = half * grids[k].ravel() + 0.5 * (hi[ax] + lo[ax])
                wk = np.meshgrid(*([gw if j == k else np.ones_like(gw) for j in range(dim - 1)]), indexing="ij")[k]
                wgrid = wgrid * wk * half
            height = abs(plane - c[axis])
            pts = c + s[:, None, None] * (face[None, :, :] - c)
            pts_all.append(pts.reshape(-1, dim))
            w_all.append((sw[:, None] * (wgrid.ravel() * height)[None, :]).ravel())
    return np.concatenate(pts_all), np.concatenate(w_all)


def accurate_sum(values: np.ndarray) -> float:
    """Correctly rounded sum, independent of any chunking of ``values``."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())
