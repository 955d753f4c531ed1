"""Acceptance criteria at their stated sizes and tolerances.

Each test prints one PASS/FAIL line; run with ``-s`` or read the log.
"""

import json
import math
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from quatpsh import battery, cli, forms
from quatpsh.cones import is_weakly_positive_2form, strong_generators, strong_positive_lp, weak_positive_test
from quatpsh.corpus import norm2_text, psh_pair_corpus, random_point, random_poly, random_polynomial_field, random_real_2form, strictly_psh_corpus
from quatpsh.fields import Grid, ScalarField, ddj_potential, parse_field, quat_hessian
from quatpsh.forms import t_inv, t_map, wedge
from quatpsh.hherm import positivity, random_hyperhermitian
from quatpsh.hkt import NotClosed, is_hkt, is_quaternionic_hermitian, metric_from_potential, solve_potential
from quatpsh.ma import cln_mass, default_schedule, weak_convergence_experiment
from quatpsh.poly import Poly
from quatpsh.psh import Mollifier, is_psh_c2, lines_test, mollify, pnorm_max

REPO = Path(__file__).resolve().parents[1]
Q1 = norm2_text(1)
NORM = f"sqrt({Q1})"

# frozen scipy quadrature values, see test_ma
PAIRING_EXP = 4.703412325189847
PAIRING_POLY = 32 * math.pi**2 / 105


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\ncriterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  {detail}".rstrip())
        assert ok, detail

    return emit


def run_identities(names_and_sizes, seed=0):
    failures = {}
    by_name = {idt.name: idt for idt in battery.IDENTITIES}
    for name, size in names_and_sizes:
        counterexample = by_name[name].check(random.Random(seed), size)
        if counterexample is not None:
            failures[name] = counterexample
    return failures


def test_moore_battery(verdict):
    start = time.perf_counter()
    failures = run_identities([("moore-diagonal", 50), ("moore-2x2", 50), ("moore-identity", 1), ("moore-realization", 200)])
    elapsed = time.perf_counter() - start
    verdict(1, "Moore determinant battery", not failures and elapsed < 30, f"{elapsed:.1f}s {failures or ''}")


def test_congruence_and_embedding(verdict):
    failures = run_identities([("moore-congruence", 100), ("moore-complex", 100)])
    verdict(2, "congruence and complex embedding", not failures, str(failures or ""))


def test_t_round_trip(verdict):
    failures = run_identities([("t-roundtrip", 100), ("t-normalization", 1)])
    verdict(3, "t round trip", not failures, str(failures or ""))


def test_operator_identities(verdict):
    names = ["del-squared", "del-delJ-anticommute", "ddj-real", "structure-anticommute", "del-from-dI", "sign-pattern"]
    failures = run_identities([(name, 50) for name in names])
    verdict(4, "operator identities", not failures, str(failures or ""))


def test_flat_bridges(verdict):
    rng = random.Random(5)
    bad = []
    for i in range(30):
        n = 1 + i % 2
        f = random_polynomial_field(rng, n)
        omega, hess = ddj_potential(f), quat_hessian(f)
        for _ in range(20):
            x = random_point(rng, 4 * n)
            if t_map(omega, x) != Fraction(1, 4) * hess.evaluate(x):
                bad.append((str(f), x))
    failures = run_identities([("top-degree-bridge", 20)])
    verdict(5, "flat bridges", not bad and not failures, str((bad[:1], failures) if bad or failures else ""))


def test_mixed_top_degree(verdict):
    failures = run_identities([("mixed-top-ratio", 50), ("mixed-units", 1)])
    verdict(6, "mixed top-degree identity", not failures, str(failures or ""))


def test_weak_limit(verdict):
    start = time.perf_counter()
    u = parse_field(NORM)
    moll = Mollifier(1)
    schedule = default_schedule()
    rel = {}
    for label, phi, target in (
        ("poly", f"(1-({Q1}))^3*(1+t1/2+x1*y1)", PAIRING_POLY),
        ("exp", f"(1-({Q1}))^2*exp(t1)", PAIRING_EXP),
    ):
        res = weak_convergence_experiment(u, parse_field(phi), schedule, mollifier=moll)
        rel[label] = res.limit / target - 1
    mass = weak_convergence_experiment(u, None, schedule, mollifier=moll)
    rel["ball"] = mass.limit / (2 * math.pi**2) - 1
    elapsed = time.perf_counter() - start
    ok = all(abs(v) < 1e-2 for v in rel.values()) and elapsed < 120
    detail = " ".join(f"{k}={v:+.1e}" for k, v in rel.items())
    verdict(7, "weak limit for |q|", ok, f"{detail} {elapsed:.0f}s")


def test_cln_boundedness(verdict):
    u = parse_field(NORM)
    moll = Mollifier(1)
    reports = [cln_mass([u], ([-1] * 4, [1] * 4), ([-1.5] * 4, [1.5] * 4), eps=e, mollifier=moll) for e in default_schedule()]
    masses = [r.mass for r in reports]
    ratios = [r.ratio for r in reports]
    spread = max(ratios) / min(ratios) - 1
    ok = all(np.isfinite(masses)) and max(masses) < 60 and spread < 0.1
    verdict(8, "CLN boundedness", ok, f"ratio spread {spread:.2%}")


def test_psh_closure(verdict):
    grid = Grid.cube(1, -0.5, 0.5, 3)
    problems = []
    for idx, (f, g) in enumerate(psh_pair_corpus()):
        if not (is_psh_c2(f, grid).is_psh and is_psh_c2(g, grid).is_psh):
            problems.append(("pair", idx))
        for p in (1, 2, 4, 8):
            if not is_psh_c2(pnorm_max(f, g, p, samples=grid), grid).is_psh:
                problems.append(("pnorm", idx, p))
    moll = Mollifier(1)
    small = Grid.cube(1, -0.4, 0.4, 3)
    for text in (NORM, Q1, f"exp(t1) + {Q1}"):
        u = parse_field(text)
        for eps in (0.2, 0.1):
            if not mollify(u, eps, small, with_hessian=True, mollifier=moll).psh_verdict().is_psh:
                problems.append(("mollify", text, eps))
    corpus = [
        (Q1, True),
        (f"({Q1})^2", True),
        (f"exp(t1) + {Q1}", True),
        ("t1^2 - x1^2", True),
        (f"-({Q1})", False),
        ("t1^2 - 3*x1^2", False),
        (f"({Q1}) - 16*t1^2*x1^2", False),
    ]
    for text, expected in corpus:
        u = parse_field(text, 1)
        c2 = is_psh_c2(u, grid).is_psh
        lines = lines_test(u, grid.points(), 6, seed=1, radii=[0.05]).is_psh
        if not c2 == lines == expected:
            problems.append(("criteria", text))
    verdict(9, "psh closure", not problems, str(problems or ""))


def test_cones(verdict):
    rng = random.Random(10)
    problems = []
    for i in range(200):
        eta = random_real_2form(rng, 1 + i % 3, spread=2)
        cert = is_weakly_positive_2form(eta)
        if cert.is_member != positivity(t_map(eta)).is_psd or not cert.verify(eta):
            problems.append(("2-form", str(eta)))
    for seed in range(5):
        g = strong_generators(2, 3, 1, seed=seed)[0]
        refuted = weak_positive_test(-g, 8, seed)
        if refuted.verdict != "non-member" or not refuted.verify(-g):
            problems.append(("refutation", seed))
        gens = strong_generators(2, 3, 3, seed=seed)
        eta = gens[0] + 2 * gens[1] + 3 * gens[2]
        lp = strong_positive_lp(eta, 0, generators=gens)
        if not (lp.is_member and lp.verify(eta)):
            problems.append(("lp", seed))
        a, b = strong_generators(1, 2, 2, seed)
        prod = strong_positive_lp(wedge(a, b), 4, seed)
        if not (prod.is_member and prod.verify(wedge(a, b))):
            problems.append(("product", seed))
    verdict(10, "cones", not problems, str(problems[:3] or ""))


def real_polynomial_field(rng, n, degree):
    p = random_poly(rng, 4 * n, max_degree=degree, terms=4, real=True)
    top = [0] * (4 * n)
    top[rng.randrange(4 * n)] = degree
    return ScalarField.from_poly(p + Poly(4 * n, {tuple(top): 1}))


def test_hkt_round_trip(verdict):
    rng = random.Random(11)
    problems = []
    for i in range(30):
        n, degree = (1, 2 + i % 5) if i % 2 == 0 else (2, 2 + i % 3)
        omega = ddj_potential(real_polynomial_field(rng, n, degree))
        if ddj_potential(solve_potential(omega, degree)) != omega:
            problems.append(("round trip", str(omega)))
    raised = 0
    for _ in range(10):
        eta = t_inv(random_hyperhermitian(rng, 2, spread=2))
        while eta.is_zero():
            eta = t_inv(random_hyperhermitian(rng, 2, spread=2))
        coeff = random_poly(rng, 8, max_degree=2, terms=3, real=True) + Poly(8, {(0, 0, 0, 0, rng.randint(1, 2), 0, 0, 0): 1})
        try:
            solve_potential(eta.scale(coeff), 4)
        except NotClosed:
            raised += 1
    if raised != 10:
        problems.append(("not closed", raised))
    for n in (1, 2):
        for f in strictly_psh_corpus(n):
            g = metric_from_potential(f)
            if not (is_quaternionic_hermitian(g)[0] and is_hkt(g)[0]):
                problems.append(("metric", str(f)))
    verdict(11, "HKT round trip", not problems, str(problems[:3] or ""))


def test_determinism(verdict, tmp_path, capsys):
    def artifacts(argv, out):
        code = cli.main(argv + ["--out", str(out)])
        capsys.readouterr()
        files = [out] if out.is_file() else sorted(out.iterdir())
        return code, {p.name: p.read_bytes() for p in files}

    problems = []
    first = artifacts(["verify", "--seed", "0"], tmp_path / "v1.json")
    second = artifacts(["verify", "--seed", "0"], tmp_path / "v2.json")
    if first[0] != 0 or list(first[1].values()) != list(second[1].values()):
        problems.append("verify")
    for config in sorted((REPO / "configs").iterdir()):
        a = artifacts(["run", "--config", str(config)], tmp_path / f"{config.stem}_a")
        b = artifacts(["run", "--config", str(config)], tmp_path / f"{config.stem}_b")
        if a != b or not a[1]:
            problems.append(config.name)
    verdict(12, "determinism of artifacts", not problems, str(problems or ""))
