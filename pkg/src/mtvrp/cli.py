"""Command-line interface: solve, generate, verify, oracle, and sweep.

All data output goes to stdout as JSON (line-delimited for sweep);
diagnostics and traces go to stderr.  Exit codes: 0 success/optimal,
1 usage or runtime error, 2 infeasible (or failed verification),
3 limit hit (incumbent still written when one exists).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from mtvrp import bnb, instance as inst_mod, oracle as oracle_mod, twgraph

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_LIMIT = 3


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _solution_json(sol) -> str:
    return json.dumps(inst_mod.solution_to_dict(sol), indent=2)


def cmd_solve(args) -> int:
    try:
        inst = inst_mod.load(args.instance)
    except (OSError, inst_mod.InstanceError) as exc:
        _err(str(exc))
        return EXIT_ERROR
    trace = None
    if args.trace:
        def trace(rec):
            print(json.dumps(rec, default=str), file=sys.stderr)
    limits = bnb.Limits(time_limit=args.time_limit, label_cap=args.label_cap)
    result = bnb.solve(inst, n_seg_tar=args.segments, limits=limits,
                       trace=trace, dump_lp=args.dump_lp)
    if args.stats:
        with open(args.stats, "w") as fh:
            json.dump(result.stats, fh, indent=2, default=str)
            fh.write("\n")
    if result.solution is not None:
        text = _solution_json(result.solution)
        print(text)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
    if result.status == bnb.STATUS_OPTIMAL:
        return EXIT_OK
    if result.status == bnb.STATUS_INFEASIBLE:
        print(json.dumps({"status": "infeasible"}))
        return EXIT_INFEASIBLE
    return EXIT_LIMIT


def cmd_generate(args) -> int:
    inst = inst_mod.generate(
        seed=args.seed, n_tar=args.targets, n_agt=args.agents,
        capacity=args.capacity, windows_per_target=args.windows,
        total_window_len=args.window_sum)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"mtvrp-s{args.seed}-t{args.targets}-a{args.agents}.json"
    inst_mod.save(inst, path)
    print(str(path))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        inst = inst_mod.load(args.instance)
        sol = inst_mod.load_solution(args.solution)
    except (OSError, inst_mod.InstanceError, json.JSONDecodeError) as exc:
        _err(str(exc))
        return EXIT_ERROR
    report = inst_mod.verify(inst, sol)
    print(json.dumps({"ok": report.ok, "violations": report.violations,
                      "recomputed_cost": report.recomputed_cost}, indent=2))
    return EXIT_OK if report.ok else EXIT_INFEASIBLE


def cmd_oracle(args) -> int:
    try:
        inst = inst_mod.load(args.instance)
    except (OSError, inst_mod.InstanceError) as exc:
        _err(str(exc))
        return EXIT_ERROR
    try:
        res = oracle_mod.exhaustive_optimum(inst, n_seg_tar=args.segments)
    except oracle_mod.OracleSizeError as exc:
        _err(str(exc))
        return EXIT_ERROR
    if res.cost == math.inf:
        print(json.dumps({"status": "infeasible"}))
        return EXIT_INFEASIBLE
    print(json.dumps({"status": "optimal", "cost": res.cost,
                      "tours": [list(t) for t in res.tours]}, indent=2))
    return EXIT_OK


SWEEP_KNOBS = {
    "targets": "targets",
    "capacity": "capacity",
    "agents": "agents",
    "windows": "window_sum",
    "segments": "segments",
}


def cmd_sweep(args) -> int:
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _err(str(exc))
        return EXIT_ERROR
    knob = SWEEP_KNOBS[args.experiment]
    base = {
        "seeds": cfg.get("seeds", [0]),
        "targets": cfg.get("targets", 4),
        "agents": cfg.get("agents", 2),
        "capacity": cfg.get("capacity"),
        "windows": cfg.get("windows", 2),
        "window_sum": cfg.get("window_sum", 20.0),
        "segments": cfg.get("segments", 8),
        "time_limit": cfg.get("time_limit"),
    }
    values = cfg["values"]
    worst = EXIT_OK
    for value in values:
        params = dict(base)
        params[knob] = value
        for seed in params["seeds"]:
            inst = inst_mod.generate(
                seed=seed, n_tar=params["targets"], n_agt=params["agents"],
                capacity=params["capacity"],
                windows_per_target=params["windows"],
                total_window_len=params["window_sum"])
            limits = bnb.Limits(time_limit=params["time_limit"])
            result = bnb.solve(inst, n_seg_tar=params["segments"],
                               limits=limits)
            record = {"experiment": args.experiment, "value": value,
                      "seed": seed, "status": result.status}
            record.update(result.stats)
            print(json.dumps(record, default=str), flush=True)
            if result.status == bnb.STATUS_LIMIT:
                worst = max(worst, EXIT_LIMIT)
    return worst


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mtvrp",
                                description="Exact moving-target VRP solver")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an instance to optimality")
    s.add_argument("instance")
    s.add_argument("--segments", type=int, default=32)
    s.add_argument("--time-limit", type=float, default=None)
    s.add_argument("--label-cap", type=int,
                   default=bnb.pricing.DEFAULT_LABEL_CAP)
    s.add_argument("--trace", action="store_true")
    s.add_argument("--out", default=None)
    s.add_argument("--stats", default=None)
    s.add_argument("--dump-lp", default=None)
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("generate", help="generate a random instance")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--targets", type=int, required=True)
    g.add_argument("--agents", type=int, required=True)
    g.add_argument("--capacity", type=float, default=None)
    g.add_argument("--windows", type=int, default=2)
    g.add_argument("--window-sum", type=float, default=20.0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="check a solution against an instance")
    v.add_argument("instance")
    v.add_argument("solution")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="exhaustive optimum (small instances)")
    o.add_argument("instance")
    o.add_argument("--segments", type=int, default=4)
    o.set_defaults(func=cmd_oracle)

    w = sub.add_parser("sweep", help="parameter sweep emitting ND-JSON stats")
    w.add_argument("--experiment", required=True, choices=sorted(SWEEP_KNOBS))
    w.add_argument("--config", required=True)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_ERROR
    return code


if __name__ == "__main__":
    sys.exit(main())
