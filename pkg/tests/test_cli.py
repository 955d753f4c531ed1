import json
from pathlib import Path

import pytest

from quatpsh import cli

REPO = Path(__file__).resolve().parents[1]
NORM2 = "t1^2+x1^2+y1^2+z1^2"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out) if out else None, err


def test_verify_filter(capsys):
    code, data, _ = run_json(capsys, "verify", "--filter", "flat-bridge")
    assert code == cli.EXIT_OK
    assert [r["name"] for r in data["records"]] == ["flat-bridge"]
    code, _, err = run(capsys, "verify", "--filter", "nothing-matches")
    assert code == cli.EXIT_USAGE and "nothing-matches" in err


def test_moore_det(capsys):
    code, data, _ = run_json(capsys, "moore-det", '[["2","i"],["-i","3"]]', "--check-realization")
    assert code == 0 and data == {"moore_det": "5", "via_realization": "5"}
    code, data, _ = run_json(capsys, "moore-det", '[["2","i"],["-i","3"]]', "--float")
    assert data["moore_det"] == pytest.approx(5.0)


def test_mixed_det(capsys):
    code, data, _ = run_json(capsys, "mixed-det", '[["8","0"],["0","0"]]', '[["0","0"],["0","8"]]')
    assert code == 0 and data["mixed_det"] == "32"


def test_psd_check(capsys):
    code, data, _ = run_json(capsys, "psd-check", '[["1","j"],["-j","1"]]')
    assert code == 0 and data["verdict"] == "positive-semidefinite"
    code, data, _ = run_json(capsys, "psd-check", '[["1","0"],["0","-1"]]')
    assert code == cli.EXIT_NEGATIVE and data["verdict"] == "indefinite"


def test_matrix_from_file(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text('[["1","0","0"],["0","2","0"],["0","0","3"]]')
    code, data, _ = run_json(capsys, "moore-det", f"@{path}")
    assert code == 0 and data["moore_det"] == "6"


def test_field_eval_and_csv(capsys, tmp_path):
    code, data, _ = run_json(capsys, "field-eval", f"sqrt({NORM2})", "--point", "3,4,0,0")
    assert code == 0 and data["values"] == [pytest.approx(5.0)]
    out = tmp_path / "vals.csv"
    code, _, _ = run(capsys, "field-eval", NORM2, "--grid=-1:1:3", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "u0,u1,u2,u3,value" and len(lines) == 82
    assert json.loads(out.with_suffix(".json").read_text())["field"]


def test_hessian(capsys):
    code, data, _ = run_json(capsys, "hessian", NORM2, "--point", "0,0,0,0")
    assert data["hessians"][0]["hessian"]["entries"] == [[{"t": "8", "x": "0", "y": "0", "z": "0"}]]


def test_psh_check(capsys):
    code, data, _ = run_json(capsys, "psh-check", NORM2, "--grid=-1:1:3")
    assert code == 0 and data["verdict"] == "strictly-psh"
    code, data, _ = run_json(capsys, "psh-check", "-t1^2", "--n", "1", "--point", "0,0,0,0")
    assert code == cli.EXIT_USAGE
    code, data, _ = run_json(capsys, "psh-check", "--point", "0,0,0,0", "--", "-t1^2")
    assert code == cli.EXIT_NEGATIVE and data["verdict"] == "not-psh"
    code, data, _ = run_json(capsys, "psh-check", f"sqrt({NORM2})", "--method", "lines", "--point", "0.1,0,0,0", "--lines", "4")
    assert code == 0 and data["verdict"] == "psh"


def test_ma_density(capsys):
    q2 = "t2^2+x2^2+y2^2+z2^2"
    code, data, _ = run_json(capsys, "ma-density", f"{NORM2}+{q2}", "--point", "0,0,0,0,0,0,0,0")
    assert code == 0 and data["values"] == [64.0]
    code, data, _ = run_json(capsys, "ma-density", NORM2, q2, "--n", "2", "--point", "0,0,0,0,0,0,0,0")
    assert data["values"] == [pytest.approx(32.0)]


def test_cln_mass(capsys):
    code, data, _ = run_json(capsys, "cln-mass", f"1+{NORM2}")
    assert code == 0 and data["reports"][0]["mass"] == pytest.approx(128.0)


def test_cone_check(capsys):
    code, data, _ = run_json(capsys, "cone-check", "dz1^dz2+dz3^dz4", "--k", "1")
    assert code == 0 and data["verdict"] == "member"
    code, data, _ = run_json(capsys, "cone-check", "dz1^dz2-dz3^dz4")
    assert code == cli.EXIT_NEGATIVE and data["reverified"] is True
    code, _, err = run(capsys, "cone-check", "dz1^dz2", "--k", "2")
    assert code == cli.EXIT_USAGE


def test_hkt_and_solver(capsys):
    code, data, _ = run_json(capsys, "hkt-check", f"{NORM2}+t1^4/12")
    assert code == 0 and data["hkt"] and data["quaternionic_hermitian"]
    code, data, _ = run_json(capsys, "hkt-check", "3", "--n", "1")
    assert code == cli.EXIT_NEGATIVE and data["strictly_psh"] is False
    code, data, _ = run_json(capsys, "solve-potential", "2*dz1^dz2", "--degree", "2")
    assert code == 0 and data["status"] == "solved"
    code, data, _ = run_json(capsys, "solve-potential", "(1+t2^2)*dz1^dz2 + dz3^dz4", "--degree", "4")
    assert code == cli.EXIT_NEGATIVE and data["status"] == "not-closed"


def test_usage_errors(capsys):
    code, _, err = run(capsys, "field-eval", "t1 +", "--point", "0,0,0,0")
    assert code == cli.EXIT_USAGE and "line 1, column 5" in err
    assert run(capsys, "no-such-command")[0] == cli.EXIT_USAGE
    assert run(capsys, "moore-det", "@/nonexistent/file.json")[0] == cli.EXIT_USAGE
    assert run(capsys, "field-eval", f"sqrt({NORM2})", "--point", "0,0,0,0")[0] == cli.EXIT_USAGE
    assert run(capsys, "--help")[0] == cli.EXIT_OK


def test_internal_error(capsys, monkeypatch):
    def broken(args):
        raise RuntimeError("boom")

    monkeypatch.setattr(cli, "cmd_moore_det", broken)
    code, _, err = run(capsys, "moore-det", '[["1"]]')
    assert code == cli.EXIT_INTERNAL and "boom" in err


def test_global_flags_in_either_position(capsys):
    a = run(capsys, "--seed", "3", "psh-check", NORM2, "--method", "lines", "--point", "0,0,0,0", "--lines", "2")
    b = run(capsys, "psh-check", NORM2, "--method", "lines", "--point", "0,0,0,0", "--lines", "2", "--seed", "3")
    assert a == b and a[0] == 0


# configs -------------------------------------------------------------------------------------


def write_config(tmp_path, text, name="c.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_config_validation(capsys, tmp_path):
    missing_seed = write_config(tmp_path, "experiment: verify\n")
    code, _, err = run(capsys, "run", "--config", missing_seed)
    assert code == cli.EXIT_USAGE and "seed: missing" in err
    bogus = write_config(tmp_path, "experiment: verify\nseed: 1\nparams:\n  bogus: 2\n")
    code, _, err = run(capsys, "run", "--config", bogus)
    assert code == cli.EXIT_USAGE and "params.bogus: unknown key" in err
    grid = write_config(tmp_path, "experiment: ma-density\nseed: 1\nparams:\n  field: t1\n  grid: {lo: 0, hi: 1}\n")
    code, _, err = run(capsys, "run", "--config", grid)
    assert "params.grid.count: missing" in err
    with pytest.raises(cli.ConfigError):
        cli.validate_config({"experiment": "weak-limit", "seed": 0, "params": {}})
    with pytest.raises(cli.ConfigError):
        cli.validate_config({"experiment": "verify", "seed": True})


def test_config_run_writes_artifacts(capsys, tmp_path):
    out = tmp_path / "art"
    code, _, _ = run(capsys, "run", "--config", str(REPO / "configs" / "ma_density.json"), "--out", str(out))
    assert code == 0
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    assert set(first) == {"ma_density.json", "ma_density.csv"}
    run(capsys, "run", "--config", str(REPO / "configs" / "ma_density.json"), "--out", str(out))
    assert first == {p.name: p.read_bytes() for p in out.iterdir()}


def test_cone_config_reports_unknown(capsys, tmp_path):
    code, _, _ = run(capsys, "run", "--config", str(REPO / "configs" / "cone_check.yaml"), "--out", str(tmp_path))
    data = json.loads((tmp_path / "cone_check.json").read_text())
    assert data["verdict"] == "unknown" and code == cli.EXIT_NEGATIVE
