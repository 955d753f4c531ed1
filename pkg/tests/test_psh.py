import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quatpsh.corpus import norm2_text, psh_pair_corpus
from quatpsh.fields import Grid, GuardViolation, ScalarField, parse_field
from quatpsh.psh import (
    Mollifier,
    QuaternionicLine,
    is_psh_c2,
    line_subharmonic_test,
    lines_test,
    mollify,
    pnorm_max,
    sphere_directions,
)
from quatpsh.quat import Quaternion

Q1 = norm2_text(1)
Q12 = norm2_text(2)


@pytest.fixture(scope="module")
def mollifier1():
    return Mollifier(1)


# C^2 criterion -------------------------------------------------------------------------------


def test_c2_examples():
    grid = Grid.cube(2, -1, 1, 3)
    assert is_psh_c2(parse_field(Q12), grid).verdict == "strictly-psh"
    neg = is_psh_c2(parse_field(f"-({Q1})"), [[0, 0, 0, 0], [1, 1, 0, 0]])
    assert neg.verdict == "not-psh"
    assert neg.evidence["hessian"]["entries"] == [[{"t": "-8", "x": "0", "y": "0", "z": "0"}]]
    assert is_psh_c2(parse_field("t1 - 3*z2 + 1", 2), [[0] * 8, [1] * 8]).verdict == "psh"


def test_c2_float_route():
    grid = Grid.cube(1, -1, 1, 3)
    assert is_psh_c2(parse_field(Q1), grid).verdict == "strictly-psh"
    v = is_psh_c2(parse_field(f"t1^2 - x1^2 - y1^2 - 2*z1^2"), grid)
    assert v.verdict == "not-psh"
    assert v.evidence["min_eigenvalue"] < 0
    assert v.to_json()["verdict"] == "not-psh"


def test_c2_non_polynomial():
    ok = is_psh_c2(parse_field(f"exp({Q1})"), [[0.1, 0.2, 0.3, 0.4]])
    assert ok.verdict == "strictly-psh"
    scope = ok.to_json()["scope"]
    assert "sampled" in scope


def test_pluriharmonic_but_not_convex():
    # t1^2 - x1^2 is harmonic on the line but indefinite as a real Hessian
    grid = Grid.cube(1, -1, 1, 3)
    assert is_psh_c2(parse_field("t1^2 - x1^2"), grid).verdict == "psh"


# quaternionic lines ------------------------------------------------------------------------------


def test_line_slack_is_radius_squared_times_direction_norm():
    u = parse_field(Q12)
    line = QuaternionicLine((Quaternion(1, 0.5, 0, 0), Quaternion(0, 0, -1, 0.25)), (Quaternion(0.5, 0, 0.5, 0), Quaternion(0, 1, 0, 0)))
    xi2 = 0.25 + 0.25 + 1
    v = line_subharmonic_test(u, line, [0.5, 1.0])
    assert v.verdict == "psh"
    for rec in v.evidence["records"]:
        assert rec["slack"] == pytest.approx(rec["radius"] ** 2 * xi2, abs=1e-12)


def test_line_constant_has_zero_slack():
    u = ScalarField.constant(3, 1)
    v = line_subharmonic_test(u, QuaternionicLine((Quaternion(0),), (Quaternion(1),)), [1.0])
    assert v.evidence["records"][0]["slack"] == pytest.approx(0, abs=1e-14)


def test_line_violation():
    u = parse_field("-t1^2", 1)
    v = line_subharmonic_test(u, QuaternionicLine((Quaternion(0),), (Quaternion(1),)), [0.5])
    assert v.verdict == "not-psh"
    assert v.evidence["failure"]["slack"] == pytest.approx(-0.25 / 4, rel=1e-9)


def test_line_validation():
    with pytest.raises(ValueError):
        QuaternionicLine((Quaternion(0),), (Quaternion(0),))
    with pytest.raises(ValueError):
        line_subharmonic_test(parse_field(Q12), QuaternionicLine((Quaternion(0),), (Quaternion(1),)), [1.0])


def test_norm_is_psh_on_lines():
    u = parse_field(f"sqrt({Q1})")
    assert lines_test(u, [[0.1, 0, 0, 0]], 4, seed=0, radii=[0.05, 0.5]).is_psh


def test_sphere_directions_are_units_and_seeded():
    a = sphere_directions(2, 8, seed=3)
    b = sphere_directions(2, 8, seed=3)
    assert a == b
    for xi in a:
        assert sum(float(q.norm2()) for q in xi) == pytest.approx(1.0)


CORPUS = [
    (Q1, True),
    (f"({Q1})^2", True),
    (f"exp(t1) + {Q1}", True),
    ("t1^2 - x1^2", True),
    (f"-({Q1})", False),
    ("t1^2 - 3*x1^2", False),
    (f"({Q1}) - 16*t1^2*x1^2", False),
]


@pytest.mark.parametrize("text, expected", CORPUS)
def test_hessian_and_lines_agree(text, expected):
    u = parse_field(text, 1)
    grid = Grid.cube(1, -0.5, 0.5, 3)
    c2 = is_psh_c2(u, grid)
    lines = lines_test(u, grid.points(), 6, seed=1, radii=[0.05])
    assert c2.is_psh == expected
    assert lines.is_psh == expected


# p-norm maximum ----------------------------------------------------------------------------------


@pytest.mark.parametrize("p", [1, 2, 4, 8])
def test_pnorm_max_of_equal_fields(p):
    f = parse_field(f"1 + {Q1}")
    x = [0.3, -0.1, 0.2, 0.5]
    assert float(pnorm_max(f, f, p).evaluate(x)) == pytest.approx(2 ** (1 / p) * float(f.evaluate(x)), rel=1e-12)


def test_pnorm_max_p1_is_sum():
    f, g = parse_field(f"1 + {Q1}"), parse_field("2 + t1", 1)
    x = [0.3, -0.1, 0.2, 0.5]
    assert float(pnorm_max(f, g, 1).evaluate(x)) == pytest.approx(float((f + g).evaluate(x)))


def test_pnorm_max_approaches_max():
    f, g = parse_field(f"1 + {Q1}"), parse_field("3/2 + t1", 1)
    x = [0.3, -0.1, 0.2, 0.5]
    target = max(float(f.evaluate(x)), float(g.evaluate(x)))
    gaps = [abs(float(pnorm_max(f, g, p).evaluate(x)) - target) for p in (1, 4, 16, 64)]
    assert gaps == sorted(gaps, reverse=True)
    assert gaps[-1] < 0.02 * target


def test_pnorm_max_validation():
    f = parse_field(f"1 + {Q1}")
    with pytest.raises(ValueError):
        pnorm_max(f, f, 0.5)
    with pytest.raises(GuardViolation):
        pnorm_max(f, parse_field("t1", 1), 2, samples=Grid.cube(1, -1, 1, 3))


@pytest.mark.parametrize("pair", range(5))
def test_pnorm_max_preserves_psh(pair):
    f, g = psh_pair_corpus()[pair]
    grid = Grid.cube(1, -0.5, 0.5, 3)
    for p in (1, 2, 4, 8):
        assert is_psh_c2(pnorm_max(f, g, p, samples=grid), grid).is_psh


# mollification ---------------------------------------------------------------------------------------


def test_mollifier_kernel_mass(mollifier1):
    assert mollifier1.weights.sum() == pytest.approx(1.0, abs=1e-14)
    first = mollifier1.weights @ mollifier1.nodes
    assert np.max(np.abs(first)) < 1e-14


def test_mollify_constant_and_linear(mollifier1):
    grid = Grid.cube(1, -0.5, 0.5, 3)
    const = mollify(ScalarField.constant(2.5, 1), 0.2, grid, with_hessian=True, mollifier=mollifier1)
    assert np.allclose(const.values, 2.5, atol=1e-13)
    assert np.max(np.abs(const.hessians)) < 1e-9
    lin = mollify(parse_field("2*t1 - x1 + 3*z1 + 1"), 0.2, grid, mollifier=mollifier1)
    assert lin.sup_distance < 1e-12


def test_mollified_norm_stays_close_and_psh(mollifier1):
    u = parse_field(f"sqrt({Q1})")
    grid = Grid.cube(1, -0.4, 0.4, 3)
    for eps in (0.2, 0.1, 0.05):
        m = mollify(u, eps, grid, with_hessian=True, mollifier=mollifier1)
        assert m.sup_distance <= eps
        assert m.psh_verdict().is_psh


def test_mollify_validation(mollifier1):
    grid = Grid.cube(1, -0.1, 0.1, 3)
    with pytest.raises(ValueError):
        mollify(ScalarField.constant(1, 1), 0.2, grid, mollifier=mollifier1)
    with pytest.raises(ValueError):
        mollify(ScalarField.constant(1, 1), -1, grid, mollifier=mollifier1)
    m = mollify(ScalarField.constant(1, 1), 0.01, grid, mollifier=mollifier1)
    with pytest.raises(ValueError):
        m.psh_verdict()
