"""Command line: ``hsk run``, ``hsk sweep`` and ``hsk bounds``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .errors import HSKError
from .export import export_dot, to_dot
from .harness import (
    SWEEP_WEIGHTS, compute_connectivity_bounds, final_graph, initial_placement, random_placement,
    run_scenario, sweep_dmax,
)
from .metrics import export_csv, write_csv
from .scenario import load_scenario
from .weighting import WeightParams

SWEEP_POINT_COLUMNS = ("d_max", "mean", "stddev", "instances", "redraws", "skipped")
SWEEP_INSTANCE_COLUMNS = ("seed", "d_max", "redraws", "d_low", "d_upper", "edges", "redundant")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _override_mode(sc, mode):
    if mode is None or mode == sc.mode:
        return sc
    if mode == "distributed":
        return replace(sc, mode=mode, d_max=sc.d_max or sc.d_normal)
    return replace(sc, mode=mode, d_normal=sc.d_normal or sc.d_max)


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    sc = _override_mode(sc, args.mode)
    result = run_scenario(sc)
    g = final_graph(result.final)
    topo = result.final.topology
    positions = {i: s.position for i, s in topo.nodes.items()}
    if args.out is None:
        if args.format == "dot":
            sys.stdout.write(to_dot(g, positions))
        else:
            write_csv(result.reports, sys.stdout)
        return 0
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format in ("csv", "both"):
        export_csv(result.reports, out / "rounds.csv")
    if args.format in ("dot", "both"):
        export_dot(g, out / "final.dot", positions)
    aborted = sum(r.aborted for r in result.reports)
    print(f"{len(result.reports)} rounds ({aborted} aborted), final epoch {result.final.epoch}, "
          f"placement redraws {result.placement_redraws}; wrote {out}", file=sys.stderr)
    return 0


def _write_rows(fh, columns, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([getattr(r, c) for c in columns])


def cmd_sweep(args) -> int:
    params = WeightParams(args.M, args.alpha, args.beta)
    res = sweep_dmax(args.seeds, args.n, tuple(args.area), _floats(args.grid), args.seed,
                     tuple(args.pa_range), params, args.retries)
    if args.format == "json":
        text = json.dumps({
            "grid": list(res.grid),
            "points": [asdict(p) for p in res.points],
            "instances": [asdict(i) for i in res.instances],
        }, indent=2)
        if args.out:
            Path(args.out).write_text(text + "\n")
        else:
            print(text)
        return 0
    if args.out:
        with open(args.out, "w", newline="") as fh:
            _write_rows(fh, SWEEP_POINT_COLUMNS, res.points)
    else:
        _write_rows(sys.stdout, SWEEP_POINT_COLUMNS, res.points)
    if args.instances:
        with open(args.instances, "w", newline="") as fh:
            _write_rows(fh, SWEEP_INSTANCE_COLUMNS, res.instances)
    return 0


def cmd_bounds(args) -> int:
    if args.scenario:
        sc = load_scenario(args.scenario)
        if args.seed is not None:
            sc = replace(sc, seed=args.seed)
        nodes, _ = initial_placement(sc)
    else:
        nodes = random_placement(args.seed or 0, args.n, tuple(args.area))
    d_low, d_upper = compute_connectivity_bounds(nodes)
    if args.format == "json":
        print(json.dumps({"d_low": d_low, "d_upper": d_upper}))
    else:
        print(f"d_low={d_low:.6f} d_upper={d_upper:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hsk", description="HSK group key agreement simulator")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file and write per-round CSV / final DOT")
    run.add_argument("scenario", type=Path)
    run.add_argument("--seed", type=int)
    run.add_argument("--mode", choices=("centralized", "distributed"))
    run.add_argument("--out", type=Path, help="output directory (default: CSV or DOT on stdout)")
    run.add_argument("--format", choices=("csv", "dot", "both"), default="both")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="redundant edges under LMST across transmission ranges")
    sw.add_argument("--seeds", type=int, default=50)
    sw.add_argument("--n", type=int, default=40)
    sw.add_argument("--area", type=float, nargs=2, default=(10.0, 10.0), metavar=("W", "H"))
    sw.add_argument("--grid", default="4,5.5,7,8.5,10,12,15")
    sw.add_argument("--seed", type=int, default=0, help="base seed")
    sw.add_argument("--pa-range", type=float, nargs=2, default=(0.0, 100.0), metavar=("MIN", "MAX"))
    sw.add_argument("--M", type=float, default=SWEEP_WEIGHTS.big_M)
    sw.add_argument("--alpha", type=float, default=SWEEP_WEIGHTS.alpha)
    sw.add_argument("--beta", type=float, default=SWEEP_WEIGHTS.beta)
    sw.add_argument("--retries", type=int, default=100)
    sw.add_argument("--out", type=Path)
    sw.add_argument("--instances", type=Path, help="also write one CSV row per instance")
    sw.add_argument("--format", choices=("csv", "json"), default="csv")
    sw.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bounds", help="d_low / d_upper of a random placement")
    b.add_argument("--scenario", type=Path)
    b.add_argument("--seed", type=int)
    b.add_argument("--n", type=int, default=40)
    b.add_argument("--area", type=float, nargs=2, default=(10.0, 10.0), metavar=("W", "H"))
    b.add_argument("--format", choices=("text", "json"), default="text")
    b.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HSKError as exc:
        print(f"hsk: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
