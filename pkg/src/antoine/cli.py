"""
Command-line entry point.

Every command prints its resolved configuration (including the seed) as
JSON on stdout before running, and writes its outputs under ``--out``
(default ``$ANTOINE_OUTPUT_DIR`` or the working directory).

Exit codes: 0 success, 2 invalid parameters, 3 validation failed,
4 budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .chains import (
    RegularChainParams,
    build_theorem2_chain,
    enclosing_similar_torus,
    regular_chain_from_params,
    validate_chain,
)
from .errors import (
    BudgetExceeded,
    GeometryError,
    InsufficientData,
    InvalidParams,
    NotFound,
    NotSimilar,
    PreconditionFailed,
    ValidationFailed,
)
from .ifs import DEFAULT_BUDGET, IfsSystem, attractor_sample, iterate_cover, moran_cover_sum, similarity_dimension
from .projection import PlaneSweep, SweepConfig, sweep
from .search import SearchGrid, certified_region_report, scan

EXIT_OK, EXIT_PARAMS, EXIT_VALIDATION, EXIT_BUDGET = 0, 2, 3, 4
OUT_ENV = "ANTOINE_OUTPUT_DIR"

_INTERNAL = {"command", "func", "config", "help"}


def _add_chain_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--chain", type=str, default=None, help="chain JSON file")
    p.add_argument("--rho", type=float, default=None, help="r_T / R_T of a regular chain")
    p.add_argument("--m", type=int, default=None, help="half the number of links")
    p.add_argument("--s", type=float, default=None, help="link scale")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="antoine", description="Self-similar Antoine necklaces.")
    top.add_argument("--seed", type=int, default=0)
    top.add_argument("--tol", type=float, default=None, help="geometric tolerance override")
    top.add_argument("--out", type=str, default=None, help=f"output directory (default ${OUT_ENV} or .)")
    top.add_argument("--config", type=str, default=None, help="JSON file of option values")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-chain", help="constructive chain from a linked pair of tori")
    p.add_argument("--rb", type=float, required=False, default=None)
    p.add_argument("--RB", type=float, required=False, default=None)
    p.add_argument("--A", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.set_defaults(func=cmd_build_chain)

    p = sub.add_parser("regular", help="regular chain from (R_T, r_T, m, s)")
    p.add_argument("--R-T", dest="R_T", type=float, default=1.0)
    p.add_argument("--r-T", dest="r_T", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--s", type=float, default=None)
    p.set_defaults(func=cmd_regular)

    p = sub.add_parser("search", help="feasibility scan over (rho, s, m)")
    p.add_argument("--rho-range", nargs=3, type=float, default=[0.01, 0.5, 100], metavar=("LO", "HI", "N"))
    p.add_argument("--s-range", nargs=3, type=float, default=[0.01, 0.4, 100], metavar=("LO", "HI", "N"))
    p.add_argument("--m-list", nargs="+", type=int, default=list(range(9, 31)) + [40])
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("iterate", help="cover level and attractor sample")
    _add_chain_source(p)
    p.add_argument("--lam", type=int, default=2)
    p.add_argument("--n-points", type=int, default=0)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("project", help="projection statistics over a plane sweep")
    _add_chain_source(p)
    p.add_argument("--scheme", choices=["default", "fibonacci", "axis", "explicit"], default="default")
    p.add_argument("--n-planes", type=int, default=200)
    p.add_argument("--normals", type=float, nargs="+", default=None, help="x y z triples for --scheme explicit")
    p.add_argument("--lam", type=int, default=3)
    p.add_argument("--raster-n", type=int, default=1024)
    p.add_argument("--n-points", type=int, default=100_000)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("mesh", help="OBJ mesh of a chain or a cover level")
    _add_chain_source(p)
    p.add_argument("--lam", type=int, default=1, help="cover level to mesh (1 = the links)")
    p.add_argument("--with-ambient", action="store_true")
    p.add_argument("--n-major", type=int, default=48)
    p.add_argument("--n-minor", type=int, default=16)
    p.add_argument("--budget", type=int, default=20_000)
    p.set_defaults(func=cmd_mesh)
    return top


def _dests(parser: argparse.ArgumentParser) -> set[str]:
    return {a.dest for a in parser._actions} - _INTERNAL


def resolve_args(argv=None) -> argparse.Namespace:
    """Parse ``argv``; values from ``--config`` fill in options not given on the command line."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidParams(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InvalidParams("config must be a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = _dests(parser) | _dests(subparser)
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise InvalidParams(f"unknown config keys: {unknown}")
    parser.set_defaults(**{k: v for k, v in cfg.items() if k in _dests(parser)})
    subparser.set_defaults(**{k: v for k, v in cfg.items() if k in _dests(subparser)})
    return parser.parse_args(argv)


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUT_ENV) or ".")


def _print_config(args) -> None:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    cfg["out"] = str(_out_dir(args))
    print(json.dumps({"config": cfg}, sort_keys=True))


def _load_chain(args):
    if args.chain is not None:
        return io.read_chain_json(args.chain)
    if None in (args.rho, args.m, args.s):
        raise InvalidParams("give --chain, or all of --rho, --m and --s")
    return regular_chain_from_params(RegularChainParams(1.0, args.rho, args.m, args.s))


def _system(args) -> IfsSystem:
    chain = _load_chain(args)
    verdict = validate_chain(chain, tol=args.tol)
    if not verdict.ok:
        raise ValidationFailed(f"chain invalid: {verdict.failures[:3]}", verdict)
    return IfsSystem.from_chain(chain)


# -- commands ---------------------------------------------------------------------


def cmd_build_chain(args) -> int:
    if args.rb is None or args.RB is None:
        raise InvalidParams("--rb and --RB are required")
    out = _out_dir(args)
    chain = build_theorem2_chain(args.rb, args.RB, args.A, args.m, tol=args.tol)
    verdict = validate_chain(chain, tol=args.tol)
    try:
        big = enclosing_similar_torus(chain, args.rb, args.RB)
        enclosing = io.torus_to_dict(big)
    except PreconditionFailed as exc:
        enclosing = {"unavailable": str(exc)}
    io.write_chain_json(out / "chain.json", chain, verdict)
    io.write_json(out / "verdict.json", {"verdict": verdict.to_dict(), "enclosing_torus": enclosing,
                                         "params": chain.meta["params"]})
    print(json.dumps({"ok": verdict.ok, "links": chain.k, "m": chain.meta["params"]["m"]}))
    return EXIT_OK


def cmd_regular(args) -> int:
    if None in (args.r_T, args.m, args.s):
        raise InvalidParams("--r-T, --m and --s are required")
    out = _out_dir(args)
    chain = regular_chain_from_params(RegularChainParams(args.R_T, args.r_T, args.m, args.s))
    verdict = validate_chain(chain, tol=args.tol, regular=True)
    io.write_chain_json(out / "chain.json", chain, verdict)
    io.write_json(out / "verdict.json", {"verdict": verdict.to_dict(),
                                         "certified": verdict.ok and 2 * args.m * args.s**2 < 1})
    if not verdict.ok:
        fam, where, msg = verdict.failures[0]
        print(f"validation failed: {fam} at {where}: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    print(json.dumps({"ok": True, "links": chain.k}))
    return EXIT_OK


def cmd_search(args) -> int:
    grid = SearchGrid(
        (args.rho_range[0], args.rho_range[1], int(args.rho_range[2])),
        (args.s_range[0], args.s_range[1], int(args.s_range[2])),
        tuple(args.m_list),
    )
    cells = scan(grid, tol=args.tol, workers=args.workers)
    report = certified_region_report(cells)
    out = _out_dir(args)
    io.write_scan_csv(out / "scan.csv", cells)
    io.write_json(out / "region.json", {"grid": {"rho_range": grid.rho_range, "s_range": grid.s_range,
                                                 "m_list": grid.m_list},
                                        "per_m": [v.to_dict() for v in report.values()]})
    for v in report.values():
        print(f"2m={2 * v.m:3d} valid={v.n_valid:5d} certified={v.n_certified:5d}")
    return EXIT_OK


def cmd_iterate(args) -> int:
    sysm = _system(args)
    out = _out_dir(args)
    cover = iterate_cover(sysm, args.lam, args.budget)
    io.write_cover_csv(out / "cover.csv", cover)
    summary = {
        "lam": args.lam, "k": sysm.k, "n_tori": len(cover), "sum_sq": sysm.sum_sq,
        "certified": sysm.certified, "similarity_dimension": similarity_dimension(sysm),
        "moran": moran_cover_sum(sysm, args.lam, budget=args.budget)._asdict(), "seed": args.seed,
    }
    if args.n_points > 0:
        pts, words = attractor_sample(sysm, args.n_points, args.depth, args.seed, return_words=True)
        io.write_samples_csv(out / "samples.csv", pts, words)
        summary.update(n_points=args.n_points, depth=args.depth)
    io.write_json(out / "iterate.json", summary)
    print(json.dumps({"n_tori": len(cover), "certified": sysm.certified}))
    return EXIT_OK


def _plane_sweep(args, origin) -> PlaneSweep:
    if args.scheme == "default":
        return PlaneSweep.default(origin, args.n_planes)
    if args.scheme == "fibonacci":
        return PlaneSweep.fibonacci_sphere(args.n_planes, origin)
    if args.scheme == "axis":
        return PlaneSweep.axis_aligned(origin)
    if not args.normals or len(args.normals) % 3:
        raise InvalidParams("--scheme explicit needs --normals as x y z triples")
    return PlaneSweep.explicit(np.reshape(args.normals, (-1, 3)), origin)


def cmd_project(args) -> int:
    sysm = _system(args)
    if sysm.k**args.lam > args.budget:
        raise BudgetExceeded(f"{sysm.k}**{args.lam} tori exceed the budget {args.budget}")
    planes = _plane_sweep(args, sysm.ambient.center)
    cfg = SweepConfig(lam=args.lam, raster_n=args.raster_n, n_points=args.n_points,
                      depth=args.depth, seed=args.seed)
    reports = sweep(sysm, planes, cfg)
    out = _out_dir(args)
    io.write_reports_csv(out / "projection.csv", reports)
    slopes = [r.box_count_slope for r in reports]
    io.write_json(out / "projection.json", {
        "config": {k: v for k, v in vars(cfg).items()}, "scheme": planes.scheme, "n_planes": len(planes),
        "certified": sysm.certified, "slope_min": min(slopes), "slope_max": max(slopes),
        "max_components": max(r.component_count for r in reports),
        "max_area_ratio": max(r.raster_area for r in reports) / (math.pi * (sysm.ambient.diameter / 2) ** 2),
    })
    print(json.dumps({"planes": len(reports), "slope_min": min(slopes), "slope_max": max(slopes)}))
    return EXIT_OK


def cmd_mesh(args) -> int:
    chain = _load_chain(args)
    if args.lam == 1:
        tori = list(chain.links)
    else:
        tori = iterate_cover(IfsSystem.from_chain(chain, validate=False), args.lam, args.budget).tori
    names = [f"torus_{i}" for i in range(len(tori))]
    if args.with_ambient:
        tori, names = [chain.ambient] + tori, ["ambient"] + names
    path = io.write_obj(_out_dir(args) / "chain.obj", tori, args.n_major, args.n_minor, names)
    print(json.dumps({"objects": len(tori), "path": str(path)}))
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = resolve_args(argv)
        _print_config(args)
        return args.func(args)
    except (InvalidParams, PreconditionFailed, NotFound, NotSimilar, GeometryError, InsufficientData) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except ValidationFailed as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
