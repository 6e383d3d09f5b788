"""Command-line interface.

Subcommands: simulate (one rollout), design (weight search), compare
(true vs surrogate planner), heatmap (cost grid export), generalize
(train-few/test-many protocol). Results land in JSON/CSV files; a short
human-readable summary goes to stdout. Exit codes: 0 success, 2 usage
error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from .costs import HeatmapGrid, heatmap, load_weights, save_weights, write_heatmap_csv
from .costdesign import DesignConfig, cma_search, history_to_csv, random_search
from .harness import compare_experiment, generalization_experiment
from .planner import mpc_rollout, rollout_to_json
from .scenarios import build_scenario
from .schema import SCHEMA_VERSION


def _out_dir(args, command: str) -> Path:
    if args.out:
        path = Path(args.out)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        path = Path("runs") / f"{command}-{stamp}-seed{args.seed}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _resolve_weights(spec: str, scenario):
    if spec == "true":
        return scenario.theta_true
    return load_weights(spec)


def _cmd_simulate(args) -> int:
    scenario = build_scenario(args.scenario, wind_enabled=args.wind)
    theta = _resolve_weights(args.weights, scenario)
    rollout = mpc_rollout(theta, scenario.theta_true, scenario, args.seed)
    print(
        f"scenario {args.scenario}: {len(rollout.steps)} steps, "
        f"cumulative true cost {rollout.cumulative_true_cost:.6f}"
    )
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w") as fh:
            json.dump(rollout_to_json(rollout), fh, indent=2)
            fh.write("\n")
        print(f"rollout written to {args.out}")
    return 0


def _cmd_design(args) -> int:
    scenario = build_scenario(args.scenario, wind_enabled=args.wind)
    cfg = DesignConfig(
        budget=args.budget,
        sigma0=args.sigma0,
        n_init=args.n_init,
        master_seed=args.seed,
        workers=args.workers,
    )
    search = cma_search if args.method == "cma" else random_search
    best, history = search(cfg, scenario, scenario.theta_true)
    out = _out_dir(args, "design")
    history_to_csv(out / "history.csv", history)
    save_weights(out / "best_weights.json", best)
    best_fit = min(rec.fitness for rec in history)
    true_fit = history[0].fitness if args.method == "cma" else float("nan")
    print(f"method {args.method}: {len(history)} evaluations, best fitness {best_fit:.6f}")
    if args.method == "cma":
        print(f"true-weight fitness under the same draws: {true_fit:.6f}")
    print(f"results in {out}")
    return 0


def _cmd_compare(args) -> int:
    scenario = build_scenario(args.scenario, wind_enabled=args.wind)
    theta = _resolve_weights(args.weights, scenario)
    base, cond = compare_experiment(scenario, theta, args.trials, args.seed)
    print(
        f"true-cost planner: mean {base.mean:.6f} (stderr {base.stderr:.6f}) "
        f"over {args.trials} trials"
    )
    print(
        f"candidate planner: mean {cond.mean:.6f} (stderr {cond.stderr:.6f}), "
        f"reduction {cond.reduction_pct:.2f}%"
    )
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w") as fh:
            json.dump(
                {
                    "schema_version": SCHEMA_VERSION,
                    "results": [base.to_json(), cond.to_json()],
                },
                fh,
                indent=2,
            )
            fh.write("\n")
        print(f"comparison written to {args.out}")
    return 0


def _cmd_heatmap(args) -> int:
    scenario = build_scenario(args.scenario, wind_enabled=False)
    theta = _resolve_weights(args.weights, scenario)
    try:
        rows, cols = (int(v) for v in args.grid.lower().split("x"))
    except ValueError:
        raise ValueError(f"--grid expects ROWSxCOLS, got {args.grid!r}")
    road = scenario.road
    grid = HeatmapGrid(
        lat_min=args.lat_min if args.lat_min is not None else -1.3 * road.road_half_width,
        lat_max=args.lat_max if args.lat_max is not None else 1.3 * road.road_half_width,
        lon_min=args.lon_min,
        lon_max=args.lon_max,
        rows=rows,
        cols=cols,
    )
    speed = args.speed if args.speed is not None else scenario.v_target
    values = heatmap(
        theta, road, scenario.v_target, grid, speed, 0.0,
        humans=scenario.nominal_start.humans,
    )
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_heatmap_csv(args.out, grid, values)
    print(f"{rows}x{cols} heatmap written to {args.out}")
    return 0


def _cmd_generalize(args) -> int:
    scenario = build_scenario(args.scenario, wind_enabled=args.wind)
    n_values = [int(v) for v in args.n_init_list.split(",") if v.strip()]
    if not n_values:
        raise ValueError("--n-init-list must name at least one value")
    rows = generalization_experiment(
        scenario,
        n_values,
        test_size=args.test_size,
        replicates=args.replicates,
        master_seed=args.seed,
        budget=args.budget,
    )
    out = _out_dir(args, "generalize")
    with open(out / "table.json", "w") as fh:
        json.dump({"schema_version": SCHEMA_VERSION, "rows": rows}, fh, indent=2)
        fh.write("\n")
    with open(out / "table.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["replicate", "condition", "n_init", "mean_test_cost"]
            + [f"w{i}" for i in range(1, 8)]
        )
        for row in rows:
            writer.writerow(
                [
                    row["replicate"],
                    row["condition"],
                    "" if row["n_init"] is None else row["n_init"],
                    repr(row["mean_test_cost"]),
                ]
                + [repr(v) for v in row["weights"]]
            )
    for rep in range(args.replicates):
        base = next(
            r for r in rows if r["replicate"] == rep and r["condition"] == "true_cost"
        )
        print(f"replicate {rep}: true-cost test mean {base['mean_test_cost']:.6f}")
        for row in rows:
            if row["replicate"] == rep and row["condition"] == "learned":
                print(
                    f"  n_init {row['n_init']}: learned test mean "
                    f"{row['mean_test_cost']:.6f}"
                )
    print(f"results in {out}")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="costmpc",
        description="driving MPC simulator and surrogate cost-weight search",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out_dir=False):
        p.add_argument("--scenario", type=int, required=True, choices=(1, 2, 3))
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--wind", action="store_true", help="enable lateral wind")
        if with_out_dir:
            p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("simulate", help="run one replanning rollout")
    common(p)
    p.add_argument("--weights", default="true", help="weights JSON path, or 'true'")
    p.add_argument("--out", default=None, help="rollout JSON path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("design", help="search for surrogate weights")
    common(p, with_out_dir=True)
    p.add_argument("--budget", type=int, default=85)
    p.add_argument("--sigma0", type=float, default=0.3)
    p.add_argument("--n-init", type=int, default=8, dest="n_init")
    p.add_argument("--method", choices=("cma", "random"), default="cma")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("compare", help="paired true-vs-surrogate comparison")
    common(p)
    p.add_argument("--weights", required=True, help="weights JSON path, or 'true'")
    p.add_argument("--trials", type=int, default=7)
    p.add_argument("--out", default=None, help="comparison JSON path")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("heatmap", help="export a cost heatmap CSV")
    p.add_argument("--scenario", type=int, required=True, choices=(1, 2, 3))
    p.add_argument("--weights", default="true", help="weights JSON path, or 'true'")
    p.add_argument("--grid", default="101x101", help="ROWSxCOLS")
    p.add_argument("--speed", type=float, default=None)
    p.add_argument("--lat-min", type=float, default=None, dest="lat_min")
    p.add_argument("--lat-max", type=float, default=None, dest="lat_max")
    p.add_argument("--lon-min", type=float, default=0.0, dest="lon_min")
    p.add_argument("--lon-max", type=float, default=1.5, dest="lon_max")
    p.add_argument("--out", default="heatmap.csv")
    p.set_defaults(func=_cmd_heatmap)

    p = sub.add_parser("generalize", help="train-few/test-many experiment")
    common(p, with_out_dir=True)
    p.add_argument("--n-init-list", default="1,2,5,10", dest="n_init_list")
    p.add_argument("--test-size", type=int, default=24, dest="test_size")
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--budget", type=int, default=85)
    p.set_defaults(func=_cmd_generalize)

    return parser


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
