"""Command line front end: ``eocloak condition|solve|optimize|validate``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 validation failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .analytic import OrderingError, annulus_condition, confocal_condition
from .exterior import NumericalError, export_grid, grid_metadata, rows_to_csv, solve
from .fields import ConfigError, config_from_dict
from .geometry import GeometryError
from .kernels import BACKEND
from .metrics import UnitSystem, cloak_errors, to_dimensional
from .optimizer import (DEFAULT_EPS_INTERVAL, DEFAULT_ZETA_INTERVAL, CompatibilityError,
                        DegenerateCostError, run_optimization)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 2, 3, 4


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    config_hash: str
    solver: dict
    outputs: list
    timings: dict = field(default_factory=dict)
    version: str = __version__
    backend: str = BACKEND


def config_hash(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if hasattr(o, "__dataclass_fields__"):
        return asdict(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


def load_units(path) -> UnitSystem:
    if path is None:
        return UnitSystem()
    doc = load_json(path)
    try:
        return UnitSystem(**{k: float(v) for k, v in doc.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad units file: {exc}") from exc


def _resolved(doc: dict, args) -> dict:
    """The config document with command-line overrides folded in."""
    doc = json.loads(json.dumps(doc))
    if getattr(args, "slip_source", None):
        doc["slip_source"] = args.slip_source
    if getattr(args, "N", None):
        doc["N"] = args.N
    return doc


def _build(doc: dict):
    return config_from_dict(doc, doc.get("N"))


def _write(out: Path, name: str, text: str, written: list):
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    written.append(str(path))


def cmd_condition(args) -> int:
    units = load_units(args.units)
    if args.annulus:
        eps, z = annulus_condition(*args.annulus, n=args.n)
        geom = {"kind": "annulus", "radii": args.annulus}
    else:
        eps, z = confocal_condition(*args.confocal, n=args.n, orientation=args.orientation)
        geom = {"kind": "confocal", "xi": args.confocal, "orientation": args.orientation}
    result = {"geometry": geom, "n": args.n, "eps_ratio": eps, "zeta0": z}
    print(f"eps_s/eps_m = {eps:.4f}")
    print(f"zeta0       = {z:.4f}")
    if args.units:
        result["eps_s"] = eps * units.eps_m
        result["zeta0_V"] = to_dimensional(z, "zeta", units)
        print(f"eps_s       = {result['eps_s']:.6e} F/m")
        print(f"zeta0       = {result['zeta0_V']:.4f} V")
    if args.out:
        written = []
        _write(Path(args.out), "condition.json", _dump(result), written)
    return EXIT_OK


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    doc = _resolved(load_json(args.config), args)
    cfg = _build(doc)
    if cfg.eps_s is None or cfg.zeta0 is None:
        raise ConfigError("solve needs epsilon_s and zeta0 in the config")
    t1 = time.perf_counter()
    esol, psol = solve(cfg)
    t2 = time.perf_counter()
    rows = export_grid(cfg, esol, psol, args.window, args.res)
    summary = cloak_errors(cfg, esol, psol).to_dict()
    summary.update({"electric_cond": esol.cond, "pressure_cond": psol.cond,
                    "grid": grid_metadata(cfg)})
    out, written = Path(args.out), []
    _write(out, "grid.csv", rows_to_csv(rows), written)
    _write(out, "summary.json", _dump(summary), written)
    t3 = time.perf_counter()
    man = RunManifest("solve", doc, config_hash(doc),
                      {"N": {k: c.n for k, c in zip("B D Omega".split(), cfg.curves())},
                       "window": args.window, "resolution": args.res, "cond_limit": 1e12},
                      written, {"load": t1 - t0, "solve": t2 - t1, "export": t3 - t2})
    _write(out, "manifest.json", _dump(asdict(man)), written)
    print(f"max|phi-H| = {summary['e_max_phi']:.3e}, max|p-P| = {summary['e_max_p']:.3e}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    t0 = time.perf_counter()
    doc = _resolved(load_json(args.config), args)
    cfg = _build(doc)
    units = load_units(args.units)
    defaults = {}
    if cfg.eps_interval is None:
        defaults["epsilon_s"] = [DEFAULT_EPS_INTERVAL[0] * cfg.eps_m, DEFAULT_EPS_INTERVAL[1] * cfg.eps_m]
    if cfg.zeta_interval is None:
        defaults["zeta0"] = list(DEFAULT_ZETA_INTERVAL)
    t1 = time.perf_counter()
    report, *_ = run_optimization(cfg)
    t2 = time.perf_counter()
    rep = report.to_dict()
    rep["zeta0_V"] = to_dimensional(report.zeta_opt, "zeta", units)
    out, written = Path(args.out), []
    _write(out, "report.json", _dump(rep), written)
    man = RunManifest("optimize", doc, config_hash(doc),
                      {"N": report.nodes, "slip_source": cfg.slip_source,
                       "defaults_applied": {"intervals": defaults}, "cond_limit": 1e12},
                      written, {"load": t1 - t0, "optimize": t2 - t1})
    _write(out, "manifest.json", _dump(asdict(man)), written)
    print(f"eps_s,opt/eps_m = {report.eps_opt / cfg.eps_m:.6f} ({'interior' if report.eps_interior else 'clipped'})")
    print(f"zeta0,opt       = {report.zeta_opt:.6f} ({rep['zeta0_V']:.4f} V, "
          f"{'interior' if report.zeta_interior else 'clipped'})")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_fast, run_full

    results = run_fast() if args.level == "fast" else run_fast() + run_full()
    for r in results:
        print(r.line())
    if args.out:
        written = []
        _write(Path(args.out), "validation.json",
               _dump([{k: v for k, v in asdict(r).items() if k != "seconds"} for r in results]), written)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VALIDATION if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eocloak", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("condition", help="closed-form cloaking conditions")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--annulus", nargs=3, type=float, metavar=("R_O", "R_I", "R_E"))
    g.add_argument("--confocal", nargs=3, type=float, metavar=("XI_O", "XI_I", "XI_E"))
    c.add_argument("--n", type=int, default=1)
    c.add_argument("--orientation", choices=("x", "y"), default="x")
    c.add_argument("--units", metavar="PATH")
    c.add_argument("--out", metavar="DIR")
    c.set_defaults(func=cmd_condition)

    s = sub.add_parser("solve", help="solve the exterior problem and export a field grid")
    s.add_argument("--config", required=True, metavar="PATH")
    s.add_argument("--out", required=True, metavar="DIR")
    s.add_argument("--window", nargs=4, type=float, default=[-3.0, 3.0, -3.0, 3.0],
                   metavar=("X0", "X1", "Y0", "Y1"))
    s.add_argument("--res", nargs=2, type=int, default=[121, 121], metavar=("NX", "NY"))
    s.add_argument("--N", type=int)
    s.set_defaults(func=cmd_solve)

    o = sub.add_parser("optimize", help="design eps_s and zeta0 for a general geometry")
    o.add_argument("--config", required=True, metavar="PATH")
    o.add_argument("--out", required=True, metavar="DIR")
    o.add_argument("--N", type=int)
    o.add_argument("--slip-source", choices=("exterior", "background"))
    o.add_argument("--units", metavar="PATH")
    o.set_defaults(func=cmd_optimize)

    v = sub.add_parser("validate", help="run the built-in verification suite")
    v.add_argument("--level", choices=("fast", "full"), default="fast")
    v.add_argument("--out", metavar="DIR")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GeometryError, OrderingError, KeyError, ValueError) as exc:
        if isinstance(exc, (DegenerateCostError, CompatibilityError)):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
