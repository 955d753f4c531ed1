"""Named exact-arithmetic identity battery.

Every check draws its inputs from a seeded generator and returns ``None``
on success or a dict describing a reproducible counterexample.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import forms, linalg
from .corpus import random_form, random_point, random_polynomial_field, random_real_2form
from .fields import ddj_potential, quat_hessian
from .forms import Form, StructureAction, letter_name, t_inv, t_map, top_ratio
from .hherm import (
    HyperhermitianMatrix,
    mixed_det,
    moore_det,
    random_hyperhermitian,
    random_quaternion,
    random_quaternion_matrix,
)
from .quat import Quaternion, realize
from .scalars import CQ


@dataclass
class IdentityRecord:
    name: str
    statement: str
    status: str  # pass | fail | error
    counterexample: dict | None
    runtime: float
    seed: int
    size: int

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "statement": self.statement,
            "status": self.status,
            "counterexample": self.counterexample,
            "seed": self.seed,
            "size": self.size,
        }


@dataclass
class IdentitySuiteReport:
    records: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.status == "pass" for r in self.records)

    def failures(self) -> list:
        return [r for r in self.records if r.status != "pass"]

    def to_json(self, timings: bool = False) -> dict:
        out = {"ok": self.ok, "records": [r.to_json() for r in self.records]}
        if timings:
            out["runtimes"] = {r.name: r.runtime for r in self.records}
        return out


@dataclass(frozen=True)
class Identity:
    name: str
    statement: str
    check: Callable
    size: int


IDENTITIES: list[Identity] = []


def identity(name: str, statement: str, size: int):
    def register(fn):
        IDENTITIES.append(Identity(name, statement, fn, size))
        return fn

    return register


def _mat(a: HyperhermitianMatrix) -> dict:
    return a.to_json()


# Moore determinant ----------------------------------------------------------------


@identity("moore-diagonal", "P(diag(l_1..l_n)) = product of l_i", 30)
def _moore_diagonal(rng, size):
    for _ in range(size):
        n = rng.randint(1, 5)
        vals = [Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(n)]
        if moore_det(HyperhermitianMatrix.diag(vals)) != math.prod(vals):
            return {"diagonal": [str(v) for v in vals]}


@identity("moore-2x2", "P([[a, q], [conj q, b]]) = ab - |q|^2", 30)
def _moore_2x2(rng, size):
    for _ in range(size):
        a, b = (Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(2))
        q = random_quaternion(rng)
        m = HyperhermitianMatrix([[Quaternion(a), q], [q.conj(), Quaternion(b)]])
        if moore_det(m) != a * b - q.norm2():
            return {"matrix": _mat(m)}


@identity("moore-identity", "P(Id) = 1", 1)
def _moore_identity(rng, size):
    for n in range(1, 9):
        if moore_det(HyperhermitianMatrix.identity(n)) != 1:
            return {"n": n}


@identity("moore-realization", "det(realize(A)) = P(A)^4", 40)
def _moore_realization(rng, size):
    for i in range(size):
        n = 1 + i % 4
        a = random_hyperhermitian(rng, n)
        if linalg.det(realize(a.entries).rows) != moore_det(a) ** 4:
            return {"matrix": _mat(a)}


@identity("moore-congruence", "P(C* A C) = P(A) P(C* C)", 30)
def _moore_congruence(rng, size):
    for i in range(size):
        n = 1 + i % 3
        a = random_hyperhermitian(rng, n)
        c = random_quaternion_matrix(rng, n, spread=2)
        gram = HyperhermitianMatrix.identity(n).congruence(c)
        if moore_det(a.congruence(c)) != moore_det(a) * moore_det(gram):
            return {"matrix": _mat(a), "C": c.to_json()}


@identity("moore-complex", "P agrees with det on complex hermitian matrices", 30)
def _moore_complex(rng, size):
    for i in range(size):
        n = 1 + i % 4
        rows = [[Quaternion(0)] * n for _ in range(n)]
        for r in range(n):
            rows[r][r] = Quaternion(Fraction(rng.randint(-4, 4), rng.randint(1, 2)))
            for s in range(r + 1, n):
                q = Quaternion(Fraction(rng.randint(-3, 3), 2), Fraction(rng.randint(-3, 3), 2))
                rows[r][s], rows[s][r] = q, q.conj()
        a = HyperhermitianMatrix(rows)
        cdet = linalg.det([[CQ(q.t, q.x) for q in row] for row in rows])
        if CQ.coerce(moore_det(a)) != cdet:
            return {"matrix": _mat(a)}


@identity("mixed-units", "mixed_det(E_11, ..., E_nn) = 1/n!", 1)
def _mixed_units(rng, size):
    for n in range(1, 5):
        units = [HyperhermitianMatrix.unit(n, i) for i in range(n)]
        if mixed_det(units) != Fraction(1, math.factorial(n)):
            return {"n": n}


# the t-isomorphism ----------------------------------------------------------------------


@identity("t-roundtrip", "t(t_inv(A)) = A and t_inv(t(eta)) = eta", 30)
def _t_roundtrip(rng, size):
    for i in range(size):
        n = 1 + i % 3
        a = random_hyperhermitian(rng, n)
        if t_map(t_inv(a)) != a:
            return {"matrix": _mat(a)}
        eta = random_real_2form(rng, n)
        if t_inv(t_map(eta)) != eta:
            return {"form": str(eta)}


@identity("t-normalization", "t(dz_{2a-1} ^ dz_{2a}) = E_aa; t_inv(Id) = sum of those", 1)
def _t_normalization(rng, size):
    for n in range(1, 4):
        total = Form.zero(n)
        for a in range(n):
            w = Form.word(n, (2 * a, 2 * a + 1))
            if t_map(w) != HyperhermitianMatrix.unit(n, a):
                return {"form": str(w)}
            total = total + w
        if t_inv(HyperhermitianMatrix.identity(n)) != total:
            return {"n": n}


@identity("j-action-letters", "j_act on letters agrees with the real right action of j", 1)
def _j_letters(rng, size):
    for n in (1, 2):
        oracle = StructureAction(n)
        for k in range(2 * n):
            for letter in (2 * n + k, k):  # dzbar_k before dz_k
                mine = forms.j_act(Form.letter(n, letter))
                theirs = oracle.letter_image("J", letter)
                if mine != theirs:
                    return {"n": n, "letter": letter_name(n, letter), "j_act": str(mine), "oracle": str(theirs)}
        for which in ("I", "K"):
            for letter in range(4 * n):
                mine = forms.act(Form.letter(n, letter), which)
                if mine != oracle.letter_image(which, letter):
                    return {"n": n, "structure": which, "letter": letter_name(n, letter)}


@identity("j-volume", "J preserves the volume form", 1)
def _j_volume(rng, size):
    for n in (1, 2):
        vol = forms.volume_form(n)
        if forms.j_act(vol) != vol:
            return {"n": n}


# operator identities ---------------------------------------------------------------------

_BIDEGREES = ((0, 0), (1, 0), (0, 1), (1, 1), (2, 0))


def _operator_corpus(rng, size):
    for i in range(size):
        n = 1 + i % 2
        p, q = _BIDEGREES[i % len(_BIDEGREES)]
        yield random_form(rng, n, p, q, max_degree=4)


@identity("del-squared", "del^2 = 0 and delbar^2 = 0", 20)
def _del_squared(rng, size):
    for w in _operator_corpus(rng, size):
        if forms.del_(forms.del_(w)) or forms.delbar(forms.delbar(w)):
            return {"form": str(w), "n": w.n}


@identity("del-delJ-anticommute", "del del_J = -del_J del", 20)
def _del_delj(rng, size):
    for w in _operator_corpus(rng, size):
        if forms.del_(forms.del_J(w)) != -forms.del_J(forms.del_(w)):
            return {"form": str(w), "n": w.n}


@identity("ddj-real", "del del_J f is real for real f", 20)
def _ddj_real(rng, size):
    for i in range(size):
        f = random_polynomial_field(rng, 1 + i % 2)
        if not forms.is_real(ddj_potential(f)):
            return {"field": str(f)}


@identity("structure-anticommute", "d, d_I, d_J, d_K pairwise anticommute", 10)
def _anticommute(rng, size):
    names = (None, "I", "J", "K")
    for w in _operator_corpus(rng, size):
        for a in range(4):
            for b in range(a + 1, 4):
                x = forms.d_ci(forms.d_ci(w, names[b]), names[a])
                y = forms.d_ci(forms.d_ci(w, names[a]), names[b])
                if x + y:
                    return {"form": str(w), "n": w.n, "pair": [names[a] or "d", names[b] or "d"]}


@identity("del-from-dI", "del = (d - i d_I)/2 and delbar = (d + i d_I)/2", 20)
def _del_from_di(rng, size):
    i = CQ(0, 1)
    half = Fraction(1, 2)
    for w in _operator_corpus(rng, size):
        dw, diw = forms.d(w), forms.d_ci(w, "I")
        if forms.del_(w) != (dw - diw.scale(i)).scale(half) or forms.delbar(w) != (dw + diw.scale(i)).scale(half):
            return {"form": str(w), "n": w.n}


@identity("sign-pattern", "del del_J = -1/4 ((d d_J + d_K d_I) - i (d d_K + d_I d_J))", 20)
def _sign_pattern(rng, size):
    i = CQ(0, 1)
    dc = forms.d_ci
    for w in _operator_corpus(rng, size):
        real = dc(dc(w, "J")) + dc(dc(w, "I"), "K")
        imag = dc(dc(w, "K")) + dc(dc(w, "J"), "I")
        rhs = (real - imag.scale(i)).scale(Fraction(-1, 4))
        if forms.del_(forms.del_J(w)) != rhs:
            return {"form": str(w), "n": w.n}


# flat bridges -------------------------------------------------------------------------------


@identity("flat-bridge", "t(del del_J f) = D2 f / 4 pointwise", 10)
def _flat_bridge(rng, size):
    for i in range(size):
        n = 1 + i % 2
        f = random_polynomial_field(rng, n)
        omega = ddj_potential(f)
        hess = quat_hessian(f)
        for _ in range(4):
            x = random_point(rng, 4 * n)
            if t_map(omega, x) != Fraction(1, 4) * hess.evaluate(x):
                return {"field": str(f), "point": [str(v) for v in x]}


@identity("top-degree-bridge", "(del del_J f)^n = n!/4^n det(D2 f) dz_1 ^ ... ^ dz_2n", 8)
def _top_bridge(rng, size):
    for i in range(size):
        n = 1 + i % 2
        f = random_polynomial_field(rng, n, max_degree=3, terms=4)
        top = top_ratio(ddj_potential(f) ** n).scale(4**n)
        hess = quat_hessian(f)
        for _ in range(3):
            x = random_point(rng, 4 * n)
            if top.evaluate(x) != CQ.coerce(moore_det(hess.evaluate(x))):
                return {"field": str(f), "point": [str(v) for v in x]}


@identity("mixed-top-ratio", "top_ratio(eta_1 ^ ... ^ eta_n) = mixed_det(t(eta_1), ..., t(eta_n))", 10)
def _mixed_top(rng, size):
    for i in range(size):
        n = 2 + i % 2
        etas = [random_real_2form(rng, n, spread=2) for _ in range(n)]
        lhs = top_ratio(forms.wedge_all(etas)).constant_value()
        rhs = mixed_det([t_map(e) for e in etas])
        if lhs != CQ.coerce(rhs):
            return {"forms": [str(e) for e in etas]}


# running -------------------------------------------------------------------------------------


def select(selection: str | None = None) -> list[Identity]:
    if not selection:
        return list(IDENTITIES)
    keys = [s.strip() for s in selection.split(",") if s.strip()]
    return [idt for idt in IDENTITIES if any(k in idt.name for k in keys)]


def run_verify_suite(selection: str | None = None, seed: int = 0, scale: float = 1.0) -> IdentitySuiteReport:
    """Run the identities whose names contain any comma-separated key of ``selection``."""
    report = IdentitySuiteReport()
    for idt in select(selection):
        size = max(1, int(round(idt.size * scale)))
        rng = random.Random(f"{seed}:{idt.name}")
        start = time.perf_counter()
        try:
            cex = idt.check(rng, size)
            status = "pass" if cex is None else "fail"
        except Exception as exc:  # a crash is reported, never swallowed as a pass
            cex, status = {"error": f"{type(exc).__name__}: {exc}"}, "error"
        report.records.append(IdentityRecord(idt.name, idt.statement, status, cex, time.perf_counter() - start, seed, size))
    return report
