"""Command line entry point: domain ingestion, scenario sweeps and report files.

Errors go to standard error as ``E<nnn>: message``.  Numbers are written
with 17 significant digits so that every double round-trips.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from frac_hardy.assembly import AssemblyError, QuadratureConfig, assemble_problem, write_matrix
from frac_hardy.geometry import (
    ConvexPolygon,
    Disk,
    Domain,
    GeometryError,
    Interval,
    NonConvexError,
    NonSimplePolygonError,
    Polygon,
    RadiusError,
    M2s,
    directional_quadrature,
    m2s,
    omega_x_volume,
)
from frac_hardy.inequality_lab import KQuadError, K_integral, geom_hardy_forms
from frac_hardy.mesh import Mesh, MeshError, mesh_domain_2d, mesh_interval
from frac_hardy.spectral import HardyReport, SpectralError, hardy_report, lambda_star_bisect, lambda_star_pencil
from frac_hardy.special_constants import FracParams, ParameterError, a_ns, c_ns, h_ns, kappa_ns

__all__ = [
    "CliError",
    "ERROR_CODES",
    "ScenarioConfig",
    "parse_domain_spec",
    "serialize_domain",
    "load_config",
    "run_scenario",
    "emit_plot_data",
    "main",
]

ERROR_CODES = {
    "usage": "E001",
    "json": "E010",
    "unknown_type": "E011",
    "non_simple": "E012",
    "radius": "E013",
    "domain_field": "E014",
    "non_convex": "E015",
    "parameter": "E020",
    "mesh": "E030",
    "assembly": "E040",
    "spectral": "E050",
    "geometry": "E060",
    "k_quadrature": "E070",
    "check_failed": "E080",
    "io": "E090",
    "internal": "E099",
}


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind
        self.code = ERROR_CODES[kind]

    def __str__(self):
        return f"{self.code}: {self.args[0]}"


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return "%.17g" % x


def _s_tag(s: float) -> str:
    return repr(float(s))


# ---------------------------------------------------------------------------
# domain specs
# ---------------------------------------------------------------------------


def _number(obj, key):
    try:
        v = obj[key]
    except KeyError:
        raise CliError("domain_field", f"missing field {key!r}") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise CliError("domain_field", f"field {key!r} must be a number")
    return float(v)


def _vertices(obj):
    V = obj.get("vertices")
    try:
        arr = np.array(V, dtype=float)
    except (TypeError, ValueError):
        raise CliError("domain_field", "vertices must be a list of [x, y] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise CliError("domain_field", "vertices must be a list of [x, y] pairs")
    return arr


def parse_domain_spec(text: str) -> Domain:
    """Build a domain from its JSON description."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError("json", f"malformed domain JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise CliError("json", "domain JSON must be an object")
    kind = obj.get("type")
    try:
        if kind == "interval":
            return Interval(_number(obj, "a"), _number(obj, "b"))
        if kind == "disk":
            c = obj.get("center")
            if not isinstance(c, list) or len(c) != 2:
                raise CliError("domain_field", "center must be [x, y]")
            return Disk(np.array(c, dtype=float), _number(obj, "radius"))
        if kind == "convex_polygon":
            return ConvexPolygon(_vertices(obj))
        if kind == "polygon":
            return Polygon(_vertices(obj))
    except RadiusError as exc:
        raise CliError("radius", str(exc)) from None
    except NonSimplePolygonError as exc:
        raise CliError("non_simple", str(exc)) from None
    except NonConvexError as exc:
        raise CliError("non_convex", str(exc)) from None
    except GeometryError as exc:
        raise CliError("domain_field", str(exc)) from None
    raise CliError("unknown_type", f"unknown domain type {kind!r}")


def serialize_domain(d: Domain) -> str:
    return json.dumps(d.to_spec(), sort_keys=True)


def _read_domain(arg: str) -> tuple[str, Domain]:
    """Domain from a JSON file path or an inline JSON object; returns a name too."""
    if arg.lstrip().startswith("{"):
        return "inline", parse_domain_spec(arg)
    try:
        text = Path(arg).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError("io", f"cannot read domain file {arg!r}: {exc.strerror}") from None
    return Path(arg).stem, parse_domain_spec(text)


# ---------------------------------------------------------------------------
# scenario
# ---------------------------------------------------------------------------


@dataclass
class ScenarioConfig:
    domain_spec: list[str]
    s_values: list[float]
    lambda_grid: list[float] | None = None
    mesh_size: int | float = 64
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    seed: int = 0
    outputs: str = "out"
    jobs: int = 1
    geometry_points: int = 16
    directions: int = 400
    tol: float | None = None


def load_config(path: str) -> ScenarioConfig:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError("io", f"cannot read config {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError("json", f"malformed config JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise CliError("json", "config JSON must be an object")
    known = {f.name for f in fields(ScenarioConfig)}
    extra = set(obj) - known
    if extra:
        raise CliError("usage", f"unknown config keys: {sorted(extra)}")
    if "domain_spec" not in obj or "s_values" not in obj:
        raise CliError("usage", "config needs domain_spec and s_values")
    specs = obj["domain_spec"]
    obj["domain_spec"] = [specs] if isinstance(specs, str) else list(specs)
    base = Path(path).parent
    obj["domain_spec"] = [p if p.lstrip().startswith("{") or os.path.isabs(p) else str(base / p)
                          for p in obj["domain_spec"]]
    if "quadrature" in obj:
        try:
            obj["quadrature"] = QuadratureConfig(**obj["quadrature"])
        except (TypeError, AssemblyError) as exc:
            raise CliError("usage", f"bad quadrature block: {exc}") from None
    return ScenarioConfig(**obj)


def make_mesh(d: Domain, mesh_size) -> Mesh:
    """Integer sizes count elements per unit length; reals are the mesh width."""
    if isinstance(d, Interval):
        length = d.b - d.a
        n = mesh_size * length if isinstance(mesh_size, int) else length / float(mesh_size)
        return mesh_interval(max(4, round(n)), d.a, d.b)
    h = 1.0 / mesh_size if isinstance(mesh_size, int) else float(mesh_size)
    return mesh_domain_2d(d, h)


def _error_kind(exc: Exception) -> str:
    for cls, kind in (
        (CliError, None),
        (ParameterError, "parameter"),
        (MeshError, "mesh"),
        (AssemblyError, "assembly"),
        (SpectralError, "spectral"),
        (GeometryError, "geometry"),
        (KQuadError, "k_quadrature"),
        (OSError, "io"),
    ):
        if isinstance(exc, cls):
            return exc.kind if kind is None else kind
    return "internal"


def _geometry_rows(d: Domain, p: FracParams, rng: np.random.Generator, n: int, directions: int):
    q = directional_quadrature(p.N, directions)
    margin = 1e-3 * d.diameter
    X = d.sample_interior(n, rng, margin=margin)
    dl = np.atleast_1d(d.delta(X))
    mm = np.atleast_1d(m2s(d, X, p, q))
    MM = np.atleast_1d(M2s(d, X, p, q))
    ov = np.atleast_1d(omega_x_volume(d, X, q))
    return X, dl, mm, MM, ov


def _write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in r])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _run_cell(args) -> dict:
    index, name, spec, s, cfg = args
    cell = {"index": index, "domain": name, "s": s, "status": "ok"}
    try:
        d = parse_domain_spec(spec)
        p = FracParams(d.dim, s)
        p.require_open()
        cell["N"] = d.dim
        m = make_mesh(d, cfg.mesh_size)
        prob = assemble_problem(m, d, p, cfg.quadrature)
        rep = hardy_report(prob, d.is_convex, cfg.lambda_grid, cfg.tol)
        outdir = Path(cfg.outputs) / name
        tag = _s_tag(s)
        _write_csv(outdir / f"jcurve_{tag}.csv", ["lambda", "J"], rep.j_curve)
        emit_plot_data(rep, outdir / f"jcurve_{tag}.dat")
        rng = np.random.default_rng([cfg.seed, index])
        X, dl, mm, MM, ov = _geometry_rows(d, p, rng, cfg.geometry_points, cfg.directions)
        cols = [f"x{k + 1}" for k in range(d.dim)]
        _write_csv(outdir / f"geometry_{tag}.csv", cols + ["delta", "m2s", "M2s", "omega_x_vol"],
                   [list(x) + [a, b, c, e] for x, a, b, c, e in zip(X, dl, mm, MM, ov)])
        cell["report"] = rep.to_dict()
        cell["interior_nodes"] = prob.size
    except Exception as exc:  # each cell fails independently
        kind = _error_kind(exc)
        cell.update(status="error", error_code=ERROR_CODES[kind], message=str(exc.args[0] if exc.args else exc))
    return cell


def emit_plot_data(report: HardyReport, path) -> None:
    """Whitespace table of the curve with the constant reference column ``h``."""
    lines = [f"# lambda J h  (N={report.N} s={_s_tag(report.s)} upper_bound=true)"]
    lines += [f"{_fmt(l)} {_fmt(j)} {_fmt(report.h_reference)}" for l, j in report.j_curve]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_s_table(cells: list[dict], path) -> None:
    """``s h mu lambda_star`` rows, ascending in ``s``."""
    ok = sorted((c for c in cells if c["status"] == "ok"), key=lambda c: c["s"])
    lines = ["# s h mu lambda_star  (discrete values are upper bounds)"]
    for c in ok:
        r = c["report"]
        lines.append(f"{_fmt(c['s'])} {_fmt(r['h_reference'])} {_fmt(r['mu_discrete'])} {_fmt(r['lambda_star_pencil'])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _constants_rows(pairs):
    for N, s in pairs:
        p = FracParams(N, s)
        yield [N, s, c_ns(p), kappa_ns(p), h_ns(p), a_ns(p) if s > 0.5 else 0.0]


def run_scenario(cfg: ScenarioConfig) -> list[dict]:
    """Run every (domain, s) cell; write per-cell files and a merged summary."""
    out = Path(cfg.outputs)
    out.mkdir(parents=True, exist_ok=True)
    domains = [_read_domain(spec) for spec in cfg.domain_spec]
    names = [n if n != "inline" else f"domain{k}" for k, (n, _) in enumerate(domains)]
    if len(set(names)) != len(names):
        raise CliError("usage", "domain names (file stems) must be distinct")
    for n in names:
        (out / n).mkdir(exist_ok=True)
    tasks = []
    for (name, (_, d)) in zip(names, domains):
        for s in cfg.s_values:
            tasks.append((len(tasks), name, serialize_domain(d), float(s), cfg))
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            cells = list(ex.map(_run_cell, tasks))
    else:
        cells = [_run_cell(t) for t in tasks]

    pairs = sorted({(d.dim, float(s)) for _, d in domains for s in cfg.s_values})
    valid = [(N, s) for N, s in pairs if 0.5 <= s < 1]
    _write_csv(out / "constants.csv", ["N", "s", "c_ns", "kappa", "h", "a_ns"],
               [[N, *rest] for N, *rest in _constants_rows(valid)])
    for name in names:
        emit_s_table([c for c in cells if c["domain"] == name], out / name / "vs_s.dat")
    summary = {"upper_bound": True, "seed": cfg.seed, "cells": cells}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return cells


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _mesh_arg(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"mesh must be an integer or a width, got {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("mesh width must be positive")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--domain", action="append", default=None, help="JSON domain file (or inline JSON)")
    common.add_argument("--s", type=_float_list, default=None, help="comma-separated s values")
    common.add_argument("--mesh", type=_mesh_arg, default=32, help="elements per unit length (int) or width h")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output directory or file")
    common.add_argument("--tol", type=float, default=None, help="bisection tolerance")
    common.add_argument("--jobs", type=int, default=1)

    ap = _Parser(prog="frac-hardy", description="Fractional Hardy constants, curves and inequality checks.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    c = sub.add_parser("constants", parents=[common], help="tabulate c_ns, kappa, h and a(N,s)")
    c.add_argument("--N", type=lambda t: [int(x) for x in t.split(",")], default=[1, 2, 3])
    g = sub.add_parser("geometry", parents=[common], help="directional distances at random interior points")
    g.add_argument("--points", type=int, default=16)
    g.add_argument("--directions", type=int, default=400)
    sub.add_parser("assemble", parents=[common], help="dump A, B, M as triplet files")
    sub.add_parser("solve", parents=[common], help="discrete mu, lambda_1 and lambda*")
    j = sub.add_parser("jcurve", parents=[common], help="shifted Hardy quotient on the default lambda grid")
    j.add_argument("--lambdas", type=_float_list, default=None)
    sub.add_parser("lambda-star", parents=[common], help="lambda* by pencil and bisection")
    v = sub.add_parser("verify-geom-hardy", parents=[common], help="residual of the geometric Hardy inequality")
    v.add_argument("--samples", type=int, default=100)
    v.add_argument("--directions", type=int, default=400)
    k = sub.add_parser("appendix-k", parents=[common], help="K(x) along the inward normal")
    k.add_argument("--kmin", type=int, default=3)
    k.add_argument("--kmax", type=int, default=8)
    w = sub.add_parser("sweep", parents=[common], help="full scenario with report files")
    w.add_argument("--config", default=None, help="JSON scenario file (flags override nothing)")
    w.add_argument("--points", type=int, default=16)
    return ap


def _need(args, *names):
    for n in names:
        if getattr(args, n) in (None, []):
            raise CliError("usage", f"--{n} is required for {args.cmd}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else _fmt(v) for v in r])
    return buf.getvalue()


def _problems(args):
    _need(args, "domain", "s")
    for spec in args.domain:
        name, d = _read_domain(spec)
        m = make_mesh(d, args.mesh)
        for s in args.s:
            p = FracParams(d.dim, s).require_open()
            yield name, d, m, p, assemble_problem(m, d, p)


def _cmd_constants(args):
    _need(args, "s")
    pairs = [(N, s) for N in args.N for s in args.s]
    rows = list(_constants_rows(pairs))
    _emit(_table(["N", "s", "c_ns", "kappa", "h", "a_ns"], rows), args.out)
    return 0


def _cmd_geometry(args):
    _need(args, "domain", "s")
    rows = []
    for spec in args.domain:
        name, d = _read_domain(spec)
        for s in args.s:
            p = FracParams(d.dim, s).require_open()
            X, dl, mm, MM, ov = _geometry_rows(d, p, np.random.default_rng(args.seed), args.points, args.directions)
            for x, a, b, c, e in zip(X, dl, mm, MM, ov):
                rows.append([name, s, *np.pad(x, (0, 2 - d.dim)), a, b, c, e])
    _emit(_table(["domain", "s", "x1", "x2", "delta", "m2s", "M2s", "omega_x_vol"], rows), args.out)
    return 0


def _cmd_assemble(args):
    _need(args, "out")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, _, _, p, prob in _problems(args):
        for kind, mat in (("A", prob.A), ("B", prob.B), ("M", prob.M)):
            write_matrix(out / f"{name}_{kind}_{_s_tag(p.s)}.txt", mat, p, kind)
    return 0


def _cmd_solve(args):
    rows = []
    for name, d, _, p, prob in _problems(args):
        rep = hardy_report(prob, d.is_convex, lambdas=[], tol=args.tol)
        rows.append([name, p.s, rep.h_reference, rep.mu_discrete, rep.lambda1_discrete,
                     rep.lambda_star_pencil, rep.a_bound, "true"])
    _emit(_table(["domain", "s", "h", "mu", "lambda1", "lambda_star", "a_bound", "upper_bound"], rows), args.out)
    return 0


def _cmd_jcurve(args):
    from frac_hardy.spectral import j_curve

    rows = []
    for name, _, _, p, prob in _problems(args):
        for lam, J in j_curve(prob, args.lambdas):
            rows.append([name, p.s, lam, J])
    _emit(_table(["domain", "s", "lambda", "J"], rows), args.out)
    return 0


def _cmd_lambda_star(args):
    rows = []
    for name, d, _, p, prob in _problems(args):
        pen = lambda_star_pencil(prob)
        bis = lambda_star_bisect(prob, args.tol)
        bound = a_ns(p) * prob.domain_volume ** (-2 * p.s / p.N) if d.is_convex else None
        rows.append([name, p.s, pen, bis, bound, "true"])
    _emit(_table(["domain", "s", "lambda_star_pencil", "lambda_star_bisect", "a_bound", "upper_bound"], rows), args.out)
    return 0


def _cmd_verify(args):
    rows = []
    failed = False
    for name, d, m, p, prob in _problems(args):
        if d.dim != 2:
            raise CliError("usage", "verify-geom-hardy needs a planar domain")
        forms = geom_hardy_forms(d, m, p, directional_quadrature(2, args.directions))
        rng = np.random.default_rng(args.seed)
        worst = np.inf
        for _ in range(args.samples):
            u = rng.standard_normal(prob.size)
            worst = min(worst, forms.residual(prob.A, u) / float(u @ prob.A @ u))
        ok = worst >= -1e-6
        failed |= not ok
        rows.append([name, p.s, worst, "pass" if ok else "fail"])
    _emit(_table(["domain", "s", "min_relative_residual", "status"], rows), args.out)
    if failed:
        raise CliError("check_failed", "geometric Hardy residual below -1e-6 relative")
    return 0


def _cmd_appendix_k(args):
    _need(args, "domain", "s")
    rows = []
    for spec in args.domain:
        name, d = _read_domain(spec)
        if not isinstance(d, Disk):
            raise CliError("usage", "appendix-k walks a disk radius; give a disk domain")
        for s in args.s:
            p = FracParams(2, s).require_open()
            for k in range(args.kmin, args.kmax + 1):
                dl = 2.0**-k
                x = d.center + np.array([d.radius - dl, 0.0])
                K = K_integral(d, x, p)
                rows.append([name, s, k, dl, K, K / dl ** (2 - 2 * s)])
    _emit(_table(["domain", "s", "k", "delta", "K", "K_over_delta_pow"], rows), args.out)
    return 0


def _cmd_sweep(args):
    if args.config:
        cfg = load_config(args.config)
        if args.out:
            cfg.outputs = args.out
        if args.jobs != 1:
            cfg.jobs = args.jobs
    else:
        _need(args, "domain", "out")
        if args.s is None:  # an empty list is a valid, empty sweep
            raise CliError("usage", "--s is required for sweep")
        cfg = ScenarioConfig(domain_spec=args.domain, s_values=args.s, mesh_size=args.mesh, seed=args.seed,
                             outputs=args.out, jobs=args.jobs, tol=args.tol, geometry_points=args.points)
    cells = run_scenario(cfg)
    bad = [c for c in cells if c["status"] != "ok"]
    for c in bad:
        print(f"{c['error_code']}: cell {c['domain']} s={_s_tag(c['s'])}: {c['message']}", file=sys.stderr)
    return 1 if bad else 0


_COMMANDS = {
    "constants": _cmd_constants,
    "geometry": _cmd_geometry,
    "assemble": _cmd_assemble,
    "solve": _cmd_solve,
    "jcurve": _cmd_jcurve,
    "lambda-star": _cmd_lambda_star,
    "verify-geom-hardy": _cmd_verify,
    "appendix-k": _cmd_appendix_k,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.cmd](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:
        kind = _error_kind(exc)
        msg = str(exc) if isinstance(exc, CliError) else f"{ERROR_CODES[kind]}: {exc}"
        print(msg, file=sys.stderr)
        return 2 if kind == "usage" else 1


if __name__ == "__main__":
    sys.exit(main())
