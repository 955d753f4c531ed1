"""Command-line front end: ``quatpsh <command> ...``.

Exit codes: 0 success, 1 negative verdict, 2 usage or input error,
3 internal error.  Certificates and verdicts are JSON; numeric sequences
can also be written as CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import battery, cones, hkt, ma, psh
from .fields import FieldSyntaxError, GuardViolation, Grid, parse_field, quat_hessian
from .forms import FormSyntaxError, parse_form
from .hherm import HyperhermitianMatrix, mixed_det, moore_det, moore_det_via_realization, positivity
from .scalars import format_rational, parse_rational

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(ValueError):
    pass


class ConfigError(UsageError):
    pass


# output helpers ---------------------------------------------------------------


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


class CommandOutput:
    """What a command produced: a JSON payload, optional CSV, and an exit code."""

    def __init__(self, payload: dict, code: int = EXIT_OK, table: tuple | None = None):
        self.payload = payload
        self.code = code
        self.table = table  # (header, rows)
        self.emitted = False

    def emit(self, out: str | None) -> None:
        if out is None:
            sys.stdout.write(dumps(self.payload))
            return
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.suffix == ".csv" and self.table is not None:
            path.write_text(csv_text(*self.table))
            path.with_suffix(".json").write_text(dumps(self.payload))
        else:
            path.write_text(dumps(self.payload))


# argument parsing helpers ---------------------------------------------------------


def _read_arg(text: str) -> str:
    if text.startswith("@"):
        return Path(text[1:]).read_text()
    return text


def _matrix(text: str, exact: bool) -> HyperhermitianMatrix:
    data = json.loads(_read_arg(text))
    if isinstance(data, dict):
        data = data.get("entries", data)
    m = HyperhermitianMatrix.from_json({"n": len(data), "entries": data})
    if not exact:
        from .quat import Quaternion

        rows = [[Quaternion(*map(float, m[i, j].components)) for j in range(m.n)] for i in range(m.n)]
        m = HyperhermitianMatrix(rows, atol=1e-12)
    return m


def _point(text: str, exact: bool) -> list:
    vals = [parse_rational(v) for v in text.split(",")]
    return vals if exact else [float(v) for v in vals]


def _box(text: str, dim: int) -> tuple[list[float], list[float]]:
    lo, hi = (float(parse_rational(v)) for v in text.split(":"))
    return [lo] * dim, [hi] * dim


def _grid(text: str, dim: int) -> Grid:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError("grid is lo:hi:count")
    lo, hi = float(parse_rational(parts[0])), float(parse_rational(parts[1]))
    return Grid((lo,) * dim, (hi,) * dim, (int(parts[2]),) * dim)


def _samples(args, dim: int, exact: bool):
    if args.point:
        return [_point(p, exact) for p in args.point]
    if args.grid:
        return _grid(args.grid, dim)
    raise UsageError("give --point (repeatable) or --grid lo:hi:count")


def _field(text: str, n: int | None):
    return parse_field(_read_arg(text), n)


def _fields(texts, n: int | None) -> list:
    """Parse several fields onto a common H^n."""
    if n is None:
        n = max(_field(t, None).n for t in texts)
    return [_field(t, n) for t in texts]


# commands ------------------------------------------------------------------------


def cmd_verify(args) -> CommandOutput:
    report = battery.run_verify_suite(args.filter, seed=args.seed, scale=args.scale)
    if not report.records:
        raise UsageError(f"no identity matches {args.filter!r}")
    return CommandOutput(report.to_json(timings=args.timings), EXIT_OK if report.ok else EXIT_NEGATIVE)


def cmd_moore_det(args) -> CommandOutput:
    m = _matrix(args.matrix, args.exact)
    value = moore_det(m)
    payload = {"moore_det": value}
    if args.check_realization:
        payload["via_realization"] = moore_det_via_realization(m)
    return CommandOutput(payload)


def cmd_mixed_det(args) -> CommandOutput:
    mats = [_matrix(t, args.exact) for t in args.matrices]
    return CommandOutput({"mixed_det": mixed_det(mats)})


def cmd_psd_check(args) -> CommandOutput:
    cert = positivity(_matrix(args.matrix, args.exact), tol=args.tol, margin=args.margin)
    return CommandOutput(cert.to_json(), EXIT_OK if cert.is_psd else EXIT_NEGATIVE)


def cmd_field_eval(args) -> CommandOutput:
    f = _field(args.field, args.n)
    samples = _samples(args, f.nvars, args.exact)
    if isinstance(samples, Grid):
        pts = samples.points()
        vals = f.evaluate_many(pts)
        rows = [[*map(float, p), float(v)] for p, v in zip(pts, vals)]
    else:
        vals = [f.evaluate(p) for p in samples]
        rows = [[*map(str, p), v if isinstance(v, float) else str(v)] for p, v in zip(samples, vals)]
    header = [f"u{i}" for i in range(f.nvars)] + ["value"]
    return CommandOutput({"field": str(f), "guards": f.guard_text(), "values": [r[-1] for r in rows]}, table=(header, rows))


def cmd_hessian(args) -> CommandOutput:
    f = _field(args.field, args.n)
    hess = quat_hessian(f)
    out = []
    for p in args.point:
        x = _point(p, args.exact)
        out.append({"point": [str(v) for v in x], "hessian": hess.evaluate(x).to_json()})
    return CommandOutput({"field": str(f), "hessians": out})


def cmd_psh_check(args) -> CommandOutput:
    f = _field(args.field, args.n)
    samples = _samples(args, f.nvars, args.exact)
    if args.method == "hessian":
        verdict = psh.is_psh_c2(f, samples, tol=args.tol)
    else:
        pts = samples.points() if isinstance(samples, Grid) else np.asarray(samples, dtype=float)
        radii = [float(parse_rational(r)) for r in args.radii.split(",")]
        verdict = psh.lines_test(f, pts, args.lines, args.seed, radii, tol=args.tol)
    return CommandOutput(verdict.to_json(), EXIT_OK if verdict.is_psh else EXIT_NEGATIVE)


def cmd_ma_density(args) -> CommandOutput:
    fields = _fields(args.field, args.n)
    nvars = fields[0].nvars
    samples = _samples(args, nvars, False)
    if len(fields) == 1:
        sample = ma.ma_density(fields[0], samples, method=args.method, h=args.h)
    else:
        sample = ma.mixed_ma_density(fields, samples, method=args.method, h=args.h)
    header = [f"u{i}" for i in range(nvars)] + ["density"]
    payload = {"fields": [str(f) for f in fields], "method": sample.method, "values": sample.values}
    if sample.one_sided is not None:
        payload["one_sided"] = int(np.count_nonzero(sample.one_sided))
    return CommandOutput(payload, table=(header, sample.csv_rows()))


def cmd_cln_mass(args) -> CommandOutput:
    fields = _fields(args.field, args.n)
    dim = fields[0].nvars
    schedule = [None] if args.eps is None else [float(e) for e in args.eps.split(",")]
    reports = [ma.cln_mass(fields, _box(args.K, dim), _box(args.K_tilde, dim), eps=e) for e in schedule]
    return CommandOutput(_mass_payload(reports), table=_mass_table(reports))


def _mass_payload(reports) -> dict:
    ratios = [r.ratio for r in reports]
    payload = {"reports": [r.to_json() for r in reports]}
    if len(ratios) > 1:
        payload["ratio_variation"] = (max(ratios) - min(ratios)) / max(ratios)
    return payload


def _mass_table(reports):
    return ["eps", "mass", "sup_product", "ratio"], [[r.eps, r.mass, r.sup_product, r.ratio] for r in reports]


def _weak_limit(field, phi_text: str | None, n, radius, eps0, levels, label) -> ma.WeakLimitResult:
    phi = None if phi_text in (None, "ball") else parse_field(phi_text, n)
    return ma.weak_convergence_experiment(field, phi, ma.default_schedule(eps0, levels), radius=radius, label=label)


def cmd_weak_limit(args) -> CommandOutput:
    f = _field(args.field, args.n)
    res = _weak_limit(f, args.phi, f.n, args.radius, args.eps0, args.levels, args.phi or "ball")
    return CommandOutput(res.to_json(), table=(["eps", "pairing", "error_estimate"], res.csv_rows()))


def cmd_cone_check(args) -> CommandOutput:
    eta = parse_form(_read_arg(args.form), args.n)
    degree = cones.form_degree(eta)
    if args.k is not None and degree not in (-1, args.k):
        raise UsageError(f"form has k = {degree}, not {args.k}")
    cert = cones.cone_membership(eta, mode=args.mode, budget=args.budget, seed=args.seed)
    payload = cert.to_json()
    payload["reverified"] = cert.verify(eta)
    return CommandOutput(payload, EXIT_OK if cert.is_member else EXIT_NEGATIVE)


def cmd_hkt_check(args) -> CommandOutput:
    f = _field(args.field, args.n)
    try:
        g = hkt.metric_from_potential(f, seed=args.seed)
    except hkt.NotStrictlyPsh as exc:
        return CommandOutput({"strictly_psh": False, "point": [str(v) for v in exc.point], "certificate": exc.certificate.to_json()}, EXIT_NEGATIVE)
    herm, witness = hkt.is_quaternionic_hermitian(g)
    ok, residual = hkt.is_hkt(g) if herm else (False, None)
    payload = {
        "strictly_psh": True,
        "quaternionic_hermitian": herm,
        "witness": witness,
        "hkt": ok,
        "residual": None if residual is None else str(residual),
        "omega": str(hkt.omega_from_metric(g)) if herm else None,
    }
    return CommandOutput(payload, EXIT_OK if herm and ok else EXIT_NEGATIVE)


def cmd_solve_potential(args) -> CommandOutput:
    omega = parse_form(_read_arg(args.form), args.n)
    try:
        f = hkt.solve_potential(omega, args.degree)
    except hkt.NotClosed as exc:
        return CommandOutput({"status": "not-closed", "residual": str(exc.residual)}, EXIT_NEGATIVE)
    except hkt.DegreeBoundTooSmall as exc:
        return CommandOutput({"status": "degree-bound-too-small", "degree": exc.degree}, EXIT_NEGATIVE)
    return CommandOutput({"status": "solved", "potential": str(f)})


# experiment configs ----------------------------------------------------------------

_EXPERIMENTS = {
    "verify": {"filter": None, "scale": 1.0},
    "weak-limit": {"field": str, "n": 1, "phi": "ball", "radius": 1.0, "eps0": 0.5, "levels": 7},
    "cln-mass": {"fields": list, "n": 1, "K": [-1.0, 1.0], "K_tilde": [-1.5, 1.5], "eps": None},
    "psh-check": {"field": str, "n": 1, "grid": dict, "method": "hessian", "lines": 8, "radii": [0.25, 0.5]},
    "ma-density": {"field": str, "n": 1, "grid": dict, "method": "symbolic"},
    "cone-check": {"form": str, "n": None, "mode": "weak", "budget": 32},
}
_TOP_KEYS = {"experiment", "seed", "name", "params"}
_GRID_KEYS = {"lo", "hi", "count"}


def load_config(path: str) -> dict:
    import yaml

    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML/JSON: {exc}") from None
    return validate_config(data)


def validate_config(data) -> dict:
    if not isinstance(data, dict):
        raise ConfigError("config: expected a mapping")
    for key in data:
        if key not in _TOP_KEYS:
            raise ConfigError(f"{key}: unknown key")
    if "experiment" not in data:
        raise ConfigError("experiment: missing")
    kind = data["experiment"]
    if kind not in _EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {kind!r}")
    if "seed" not in data:
        raise ConfigError("seed: missing (seeds are mandatory)")
    if not isinstance(data["seed"], int) or isinstance(data["seed"], bool):
        raise ConfigError("seed: must be an integer")
    params = data.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigError("params: expected a mapping")
    schema = _EXPERIMENTS[kind]
    out = {}
    for key, value in params.items():
        if key not in schema:
            raise ConfigError(f"params.{key}: unknown key")
        out[key] = value
    for key, default in schema.items():
        if key not in out:
            if isinstance(default, type):
                raise ConfigError(f"params.{key}: missing")
            out[key] = default
        elif isinstance(default, type) and not isinstance(out[key], default):
            raise ConfigError(f"params.{key}: expected {default.__name__}")
    if "grid" in out:
        grid = out["grid"]
        for key in grid:
            if key not in _GRID_KEYS:
                raise ConfigError(f"params.grid.{key}: unknown key")
        for key in _GRID_KEYS:
            if key not in grid:
                raise ConfigError(f"params.grid.{key}: missing")
    return {"experiment": kind, "seed": data["seed"], "name": data.get("name", kind), "params": out}


def run_experiment(config: dict) -> CommandOutput:
    kind, seed, p = config["experiment"], config["seed"], config["params"]
    if kind == "verify":
        report = battery.run_verify_suite(p["filter"], seed=seed, scale=float(p["scale"]))
        return CommandOutput(report.to_json(), EXIT_OK if report.ok else EXIT_NEGATIVE)
    if kind == "weak-limit":
        f = parse_field(p["field"], p["n"])
        res = _weak_limit(f, p["phi"], p["n"], float(p["radius"]), float(p["eps0"]), int(p["levels"]), str(p["phi"]))
        payload = res.to_json()
        payload["seed"] = seed
        return CommandOutput(payload, table=(["eps", "pairing", "error_estimate"], res.csv_rows()))
    if kind == "cln-mass":
        fields = [parse_field(t, p["n"]) for t in p["fields"]]
        dim = 4 * p["n"]
        eps = p["eps"]
        if isinstance(eps, dict):
            schedule = ma.default_schedule(float(eps.get("eps0", 0.5)), int(eps.get("levels", 7)))
        elif eps is None:
            schedule = [None]
        else:
            schedule = [float(e) for e in (eps if isinstance(eps, list) else [eps])]
        K = ([float(p["K"][0])] * dim, [float(p["K"][1])] * dim)
        Kt = ([float(p["K_tilde"][0])] * dim, [float(p["K_tilde"][1])] * dim)
        reports = [ma.cln_mass(fields, K, Kt, eps=e) for e in schedule]
        payload = _mass_payload(reports)
        payload["seed"] = seed
        return CommandOutput(payload, table=_mass_table(reports))
    if kind in ("psh-check", "ma-density"):
        f = parse_field(p["field"], p["n"])
        g = p["grid"]
        grid = Grid((float(g["lo"]),) * f.nvars, (float(g["hi"]),) * f.nvars, (int(g["count"]),) * f.nvars)
        if kind == "ma-density":
            sample = ma.ma_density(f, grid, method=p["method"])
            header = [f"u{i}" for i in range(f.nvars)] + ["density"]
            return CommandOutput({"field": str(f), "values": sample.values, "seed": seed}, table=(header, sample.csv_rows()))
        if p["method"] == "hessian":
            verdict = psh.is_psh_c2(f, grid)
        else:
            verdict = psh.lines_test(f, grid.points(), int(p["lines"]), seed, [float(r) for r in p["radii"]])
        return CommandOutput(verdict.to_json(), EXIT_OK if verdict.is_psh else EXIT_NEGATIVE)
    if kind == "cone-check":
        eta = parse_form(p["form"], p["n"])
        cert = cones.cone_membership(eta, mode=p["mode"], budget=int(p["budget"]), seed=seed)
        return CommandOutput(cert.to_json(), EXIT_OK if cert.is_member else EXIT_NEGATIVE)
    raise ConfigError(f"experiment: {kind!r} is not runnable")


def cmd_run(args) -> CommandOutput:
    config = load_config(args.config)
    result = run_experiment(config)
    if args.out is not None:
        # --out names a directory for config runs
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / f"{config['name']}.json").write_text(dumps(result.payload))
        if result.table is not None:
            (outdir / f"{config['name']}.csv").write_text(csv_text(*result.table))
        result.emitted = True
    return result


# parser -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def global_flags(p, default):
        # accepted before or after the subcommand
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--exact", dest="exact", action="store_true", default=default(True), help="exact rational arithmetic (default)")
        mode.add_argument("--float", dest="exact", action="store_false", default=default(True), help="floating point arithmetic")
        p.add_argument("--seed", type=int, default=default(0))
        p.add_argument("--out", default=default(None), help="output file (.csv for tables) or directory for `run`")

    parser = argparse.ArgumentParser(prog="quatpsh", description="Quaternionic psh functions: exact identities and experiments.")
    global_flags(parser, lambda v: v)
    common = argparse.ArgumentParser(add_help=False)
    global_flags(common, lambda v: argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text, parents=[common])
        p.set_defaults(func=fn)
        return p

    def sampling(p):
        p.add_argument("--point", action="append", help="comma-separated coordinates (repeatable)")
        p.add_argument("--grid", help="lo:hi:count on every axis")

    p = add("verify", cmd_verify, "run the identity battery")
    p.add_argument("--filter", default=None, help="comma-separated name fragments")
    p.add_argument("--scale", type=float, default=1.0, help="multiply every corpus size")
    p.add_argument("--timings", action="store_true", help="include runtimes (not deterministic)")

    p = add("moore-det", cmd_moore_det, "Moore determinant of a hyperhermitian matrix")
    p.add_argument("matrix", help="JSON rows of quaternion literals, or @file")
    p.add_argument("--check-realization", action="store_true")

    p = add("mixed-det", cmd_mixed_det, "mixed determinant of n matrices")
    p.add_argument("matrices", nargs="+")

    p = add("psd-check", cmd_psd_check, "positivity of a hyperhermitian matrix")
    p.add_argument("matrix")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--margin", type=float, default=0.0)

    p = add("field-eval", cmd_field_eval, "evaluate a scalar field")
    p.add_argument("field")
    p.add_argument("--n", type=int, default=None)
    sampling(p)

    p = add("hessian", cmd_hessian, "quaternionic Hessian at points")
    p.add_argument("field")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--point", action="append", required=True)

    p = add("psh-check", cmd_psh_check, "psh verdict on samples")
    p.add_argument("field")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--method", choices=("hessian", "lines"), default="hessian")
    p.add_argument("--lines", type=int, default=8)
    p.add_argument("--radii", default="0.25,0.5")
    p.add_argument("--tol", type=float, default=1e-9)
    sampling(p)

    p = add("ma-density", cmd_ma_density, "Monge-Ampere density (mixed when several fields)")
    p.add_argument("field", nargs="+")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--method", choices=("symbolic", "finite-difference"), default="symbolic")
    p.add_argument("--h", type=float, default=None)
    sampling(p)

    p = add("cln-mass", cmd_cln_mass, "L1 mass against the sup-norm product")
    p.add_argument("field", nargs="+")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--K", default="-1:1")
    p.add_argument("--K-tilde", dest="K_tilde", default="-1.5:1.5")
    p.add_argument("--eps", default=None, help="comma-separated mollification scales")

    p = add("weak-limit", cmd_weak_limit, "mollified pairings and their extrapolated limit")
    p.add_argument("field")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--phi", default=None, help="test function; omit for the ball mass")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--eps0", type=float, default=0.5)
    p.add_argument("--levels", type=int, default=7)

    p = add("cone-check", cmd_cone_check, "cone membership of a constant real (2k,0)-form")
    p.add_argument("form")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--mode", choices=("weak", "strong"), default="weak")
    p.add_argument("--budget", type=int, default=32)

    p = add("hkt-check", cmd_hkt_check, "metric from a potential: Hermitian and HKT checks")
    p.add_argument("field")
    p.add_argument("--n", type=int, default=None)

    p = add("solve-potential", cmd_solve_potential, "find f with del del_J f = Omega")
    p.add_argument("form")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--degree", type=int, required=True)

    p = add("run", cmd_run, "run an experiment config (YAML or JSON)")
    p.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        result = args.func(args)
    except (UsageError, FieldSyntaxError, FormSyntaxError, GuardViolation, FileNotFoundError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"quatpsh: error: {exc}\n")
        return EXIT_USAGE
    except ValueError as exc:
        sys.stderr.write(f"quatpsh: invalid input: {exc}\n")
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"quatpsh: internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL
    if not result.emitted:
        result.emit(args.out)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
