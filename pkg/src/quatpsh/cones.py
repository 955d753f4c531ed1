"""Strongly and weakly positive cones of constant real (2k,0)-forms on H^n.

Membership is exact for k in {0, 1, n-1, n}.  For other degrees the
tests are certificate based: a negative pairing with a sampled strongly
positive form refutes, an exact conic combination of sampled generators
confirms, and anything else is reported as unknown.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import forms, linalg
from .forms import Form, pullback, t_inv, t_map, top_ratio, wedge
from .hherm import HyperhermitianMatrix, positivity, random_quaternion
from .quat import Quaternion, QuaternionMatrix, right_action_matrix, vector_to_real
from .scalars import CQ, format_rational

__all__ = [
    "ConeCertificate",
    "top_generator",
    "strong_generators",
    "coordinate_generators",
    "check_real_constant",
    "form_degree",
    "is_weakly_positive_2form",
    "is_weakly_positive_codegree2",
    "weak_positive_test",
    "strong_positive_lp",
    "cone_membership",
    "interior_radius",
    "pairing",
]


@dataclass
class ConeCertificate:
    verdict: str  # member | non-member | unknown
    k: int
    n: int
    method: str
    weights: list | None = None
    generators: list | None = None
    refutation: Form | None = None
    refutation_value: Fraction | None = None
    witness: list | None = None  # a vector A in H^n with eta(A, A*j) < 0
    witness_value: Fraction | None = None
    min_ratio: Fraction | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_member(self) -> bool:
        return self.verdict == "member"

    def verify(self, eta: Form) -> bool:
        """Re-check the certificate by direct exact evaluation."""
        if self.weights is not None:
            total = Form.zero(eta.n)
            for w, g in zip(self.weights, self.generators):
                if w < 0:
                    return False
                total = total + g.scale(w)
            return total == eta
        if self.refutation is not None:
            return pairing(eta, self.refutation) == self.refutation_value < 0
        if self.witness is not None:
            x = vector_to_real(self.witness)
            rj = right_action_matrix(Quaternion(0, 0, 1), eta.n).rows
            xj = [sum(a * b for a, b in zip(row, x)) for row in rj]
            value = forms.evaluate_multilinear(eta, [x, xj])
            return value.im == 0 and value.re == self.witness_value < 0
        return self.verdict != "non-member"

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "k": self.k, "n": self.n, "method": self.method}
        if self.weights is not None:
            out["weights"] = [format_rational(w) for w in self.weights]
            out["generators"] = [str(g) for g in self.generators]
        if self.refutation is not None:
            out["refutation"] = str(self.refutation)
            out["refutation_value"] = format_rational(self.refutation_value)
        if self.witness is not None:
            out["witness"] = [q.to_json() for q in self.witness]
            out["witness_value"] = format_rational(self.witness_value)
        if self.min_ratio is not None:
            out["min_ratio"] = format_rational(self.min_ratio)
        if self.diagnostics:
            out["diagnostics"] = self.diagnostics
        return out


# basic helpers ---------------------------------------------------------------


def form_degree(eta: Form) -> int:
    bd = eta.bidegrees()
    if not bd:
        return -1  # the zero form has every degree
    if len(bd) != 1:
        raise ValueError("expected a form of pure bidegree (2k, 0)")
    p, q = next(iter(bd))
    if q or p % 2:
        raise ValueError(f"expected bidegree (2k, 0), got ({p}, {q})")
    return p // 2


def check_real_constant(eta: Form) -> None:
    if not eta.is_constant():
        raise ValueError("cone tests need constant coefficients")
    form_degree(eta)
    if not forms.is_real(eta):
        raise ValueError("form is not real")


def pairing(eta: Form, zeta: Form) -> Fraction:
    """``top_ratio(eta ^ zeta)`` as an exact rational."""
    value = top_ratio(wedge(eta, zeta)).constant_value()
    if value.im != 0:
        raise ArithmeticError("pairing of real forms is not real")
    return value.re


def top_generator(k: int) -> Form:
    """``dz_1 ^ ... ^ dz_2k`` on H^k, the positive generator in top degree."""
    return Form.word(k, tuple(range(2 * k)), 1)


def _random_map(rng: random.Random, k: int, n: int) -> QuaternionMatrix:
    return QuaternionMatrix([[random_quaternion(rng, spread=2, dens=(1, 2)) for _ in range(n)] for _ in range(k)])


def strong_generators(k: int, n: int, count: int, seed: int) -> list[Form]:
    """Pullbacks of the top generator of H^k along seeded rational maps H^n -> H^k."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    rng = random.Random(seed)
    if k == 0:
        return [Form.scalar(n, 1) for _ in range(count)]
    xi = top_generator(k)
    out = []
    while len(out) < count:
        g = pullback(xi, _random_map(rng, k, n))
        if g:
            out.append(g)
    return out


def coordinate_generators(k: int, n: int) -> list[Form]:
    """Pullbacks along the coordinate projections onto k of the n coordinates."""
    if k == 0:
        return [Form.scalar(n, 1)]
    xi = top_generator(k)
    out = []
    for subset in itertools.combinations(range(n), k):
        rows = [[Quaternion(1 if c == s else 0) for c in range(n)] for s in subset]
        out.append(pullback(xi, QuaternionMatrix(rows)))
    return out


# exact tests ------------------------------------------------------------------


def is_weakly_positive_2form(eta: Form) -> ConeCertificate:
    """Exact membership of a real constant (2,0)-form (both cones agree)."""
    check_real_constant(eta)
    n = eta.n
    if not eta:
        return ConeCertificate("member", 1, n, "t-image")
    if form_degree(eta) != 1:
        raise ValueError("expected a (2,0)-form")
    cert = positivity(t_map(eta))
    if cert.is_psd:
        return ConeCertificate("member", 1, n, "t-image", diagnostics={"spectrum": cert.spectrum})
    return ConeCertificate(
        "non-member", 1, n, "t-image", witness=cert.witness, witness_value=cert.witness_value,
        diagnostics={"spectrum": cert.spectrum},
    )


def _dual_matrix(eta: Form) -> HyperhermitianMatrix:
    """The hyperhermitian M with ``pairing(eta, t_inv(S)) = Re tr(M S)``."""
    n = eta.n

    def functional(s: HyperhermitianMatrix) -> Fraction:
        return pairing(eta, t_inv(s))

    rows = [[Quaternion(0)] * n for _ in range(n)]
    for a in range(n):
        rows[a][a] = Quaternion(functional(HyperhermitianMatrix.unit(n, a)))
        for b in range(a + 1, n):
            parts = []
            for unit in (Quaternion(1), Quaternion(0, 1), Quaternion(0, 0, 1), Quaternion(0, 0, 0, 1)):
                e = [[Quaternion(0)] * n for _ in range(n)]
                e[a][b] = unit
                e[b][a] = unit.conj()
                parts.append(functional(HyperhermitianMatrix(e)) / 2)
            # Re(m * 1), Re(m * i), ... recover m = M[b][a]
            m = Quaternion(parts[0], -parts[1], -parts[2], -parts[3])
            rows[b][a] = m
            rows[a][b] = m.conj()
    return HyperhermitianMatrix(rows)


def is_weakly_positive_codegree2(eta: Form) -> ConeCertificate:
    """Exact membership for real constant (2n-2,0)-forms via the k=1 cone."""
    check_real_constant(eta)
    n = eta.n
    if not eta:
        return ConeCertificate("member", n - 1, n, "dual-matrix")
    if form_degree(eta) != n - 1:
        raise ValueError("expected a (2n-2,0)-form")
    dual = _dual_matrix(eta)
    cert = positivity(dual)
    if cert.is_psd:
        return ConeCertificate("member", n - 1, n, "dual-matrix", diagnostics={"spectrum": cert.spectrum})
    v = cert.witness
    rank_one = HyperhermitianMatrix([[v[a] * v[b].conj() for b in range(n)] for a in range(n)])
    zeta = t_inv(rank_one)
    return ConeCertificate(
        "non-member", n - 1, n, "dual-matrix", refutation=zeta, refutation_value=pairing(eta, zeta),
        diagnostics={"spectrum": cert.spectrum},
    )


def _top_or_scalar(eta: Form, k: int) -> ConeCertificate:
    n = eta.n
    # pairing with the complementary positive generator is the sign test
    zeta = top_generator(n) if k == 0 else Form.scalar(n, 1)
    value = pairing(eta, zeta)
    if value >= 0:
        return ConeCertificate("member", k, n, "sign", diagnostics={"value": format_rational(value)})
    return ConeCertificate("non-member", k, n, "sign", refutation=zeta, refutation_value=value)


# sampled tests -----------------------------------------------------------------


def weak_positive_test(eta: Form, budget: int, seed: int = 0, include_coordinate: bool = True) -> ConeCertificate:
    """Pair ``eta`` with sampled strongly positive forms of complementary degree."""
    check_real_constant(eta)
    n = eta.n
    if not eta:
        return ConeCertificate("member", max(form_degree(eta), 0), n, "refutation-search")
    k = form_degree(eta)
    candidates = coordinate_generators(n - k, n) if include_coordinate else []
    candidates += strong_generators(n - k, n, budget, seed)
    lowest = None
    for zeta in candidates:
        value = pairing(eta, zeta)
        if value < 0:
            return ConeCertificate("non-member", k, n, "refutation-search", refutation=zeta, refutation_value=value)
        lowest = value if lowest is None else min(lowest, value)
    return ConeCertificate(
        "unknown", k, n, "refutation-search", min_ratio=lowest,
        diagnostics={"sampled": len(candidates), "leaning": "member"},
    )


def _real_vector(eta: Form, words: Sequence[tuple]) -> list[Fraction]:
    out = []
    for w in words:
        c = eta.coefficient(w).constant_value() if w in eta.terms else CQ(0)
        out.extend((c.re, c.im))
    return out


def _exact_simplex(columns: list[list[Fraction]], target: list[Fraction]) -> list[Fraction] | None:
    """Phase-one simplex with Bland's rule: ``A w = b, w >= 0``."""
    m, ncol = len(target), len(columns)
    rows = []
    for i in range(m):
        sign = -1 if target[i] < 0 else 1
        rows.append([sign * columns[j][i] for j in range(ncol)] + [Fraction(1 if r == i else 0) for r in range(m)] + [sign * target[i]])
    basis = [ncol + i for i in range(m)]
    width = ncol + m
    # objective: minimise the sum of artificials, reduced costs kept in ``cost``
    cost = [-sum(rows[i][j] for i in range(m)) for j in range(width)] + [-sum(r[-1] for r in rows)]
    for j in range(ncol, width):
        cost[j] = Fraction(0)
    while True:
        enter = next((j for j in range(width) if cost[j] < 0), None)
        if enter is None:
            break
        ratios = [(rows[i][-1] / rows[i][enter], basis[i], i) for i in range(m) if rows[i][enter] > 0]
        if not ratios:
            return None  # unbounded phase one cannot happen; treat as failure
        _, _, leave = min(ratios)
        piv = rows[leave][enter]
        rows[leave] = [v / piv for v in rows[leave]]
        for i in range(m):
            if i != leave and rows[i][enter]:
                f = rows[i][enter]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[leave])]
        f = cost[enter]
        cost = [a - f * b for a, b in zip(cost, rows[leave])]
        basis[leave] = enter
    if -cost[-1] != 0:
        return None
    w = [Fraction(0)] * ncol
    for i, b in enumerate(basis):
        if b < ncol:
            w[b] = rows[i][-1]
    return w


def _float_lp(columns, target):
    import numpy as np
    from scipy.optimize import linprog

    a = np.array([[float(c[i]) for c in columns] for i in range(len(target))])
    b = np.array([float(v) for v in target])
    res = linprog(np.zeros(len(columns)), A_eq=a, b_eq=b, bounds=(0, None), method="highs")
    return res


def strong_positive_lp(eta: Form, budget: int, seed: int = 0, generators: Sequence[Form] | None = None) -> ConeCertificate:
    """Conic-combination search over sampled generators (plus coordinate ones)."""
    check_real_constant(eta)
    n = eta.n
    if not eta:
        return ConeCertificate("member", max(form_degree(eta), 0), n, "lp", weights=[], generators=[])
    k = form_degree(eta)
    if generators is None:
        generators = coordinate_generators(k, n) + strong_generators(k, n, budget, seed)
    generators = list(generators)
    words = list(itertools.combinations(range(2 * n), 2 * k))
    columns = [_real_vector(g, words) for g in generators]
    target = _real_vector(eta, words)
    diagnostics = {"generators": len(generators)}
    if len(generators) <= 64:
        weights = _exact_simplex(columns, target)
        diagnostics["solver"] = "exact-simplex"
    else:
        diagnostics["solver"] = "highs"
        res = _float_lp(columns, target)
        weights = None
        if res.status == 0:
            support = [j for j, v in enumerate(res.x) if v > 1e-9]
            sub = [{j: columns[c][i] for j, c in enumerate(support) if columns[c][i]} for i in range(len(target))]
            sol = linalg.solve_sparse(sub, target, len(support))
            if sol is not None and all(v >= 0 for v in sol):
                weights = [Fraction(0)] * len(generators)
                for j, c in enumerate(support):
                    weights[c] = sol[j]
            else:
                diagnostics["reverification"] = "failed"
        else:
            diagnostics["status"] = res.message
    if weights is None:
        return ConeCertificate("unknown", k, n, "lp", diagnostics=diagnostics)
    cert = ConeCertificate("member", k, n, "lp", weights=weights, generators=generators, diagnostics=diagnostics)
    if not cert.verify(eta):
        raise ArithmeticError("LP certificate failed exact re-verification")
    return cert


def cone_membership(eta: Form, mode: str = "weak", budget: int = 32, seed: int = 0) -> ConeCertificate:
    """Dispatch to the exact tests when available, else to certificates."""
    check_real_constant(eta)
    n = eta.n
    k = form_degree(eta)
    if k < 0:
        return ConeCertificate("member", 0, n, "zero")
    if k in (0, n):
        return _top_or_scalar(eta, k)
    if k == 1:
        return is_weakly_positive_2form(eta)
    if k == n - 1:
        return is_weakly_positive_codegree2(eta)
    weak = weak_positive_test(eta, budget, seed)
    if mode == "weak" or weak.verdict == "non-member":
        return weak
    return strong_positive_lp(eta, budget, seed)


def interior_radius(eta: Form) -> float:
    """For a real (2,0)-form: the spectral radius of perturbations keeping it positive.

    A perturbation whose t-image has operator norm below the smallest
    eigenvalue of ``realize(t(eta))`` stays in the cone.
    """
    import numpy as np

    from .quat import realize

    vals = np.linalg.eigvalsh(realize(t_map(eta).entries).to_numpy())
    return float(max(vals[0], 0.0))
