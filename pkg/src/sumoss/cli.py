"""Command-line entry point: ``sumoss {plan,simulate,compare,sweep,verify}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import records
from .config import RunConfig, load_config
from .errors import ConfigError, SumossError
from .experiments import compare_methods, comparison_seeds, sensitivity_sweep
from .planners import PlanState
from .simulator import METHODS, plan_next, run_mission
from .verify import run_all

log = logging.getLogger("sumoss")


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    mission = cfg.mission
    try:
        if getattr(args, "seed", None) is not None:
            mission = replace(mission, seed=args.seed)
        if getattr(args, "samples", None) is not None:
            mission = replace(mission, planner=replace(mission.planner, expectation_samples=args.samples))
        if getattr(args, "method", None) and "," not in args.method:
            mission = mission.with_method(args.method)
        sweep = replace(cfg.sweep, base=mission, master_seed=mission.seed)
        if getattr(args, "runs", None) is not None:
            sweep = replace(sweep, runs=args.runs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(mission, sweep)


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_plan(args) -> int:
    cfg = _load(args).mission
    try:
        doc = json.loads(Path(args.state).read_text())
        state = PlanState(doc.get("chosen", []))
    except (OSError, ValueError, AttributeError) as exc:
        raise ConfigError(f"state file {args.state}: {exc}") from exc
    V = cfg.area.candidates()
    idx, gain = plan_next(cfg, state, V)
    x, y = V.positions[idx]
    print(json.dumps({"method": cfg.planner.method, "step": state.step + 1, "index": idx, "x": float(x), "y": float(y), "gain": gain}))
    return 0


def cmd_simulate(args) -> int:
    cfg = _load(args).mission
    mission = run_mission(cfg)
    out = _out(args)
    stem = f"mission_{cfg.planner.method}_seed{cfg.seed}"
    path = records.write_mission_log(mission, out / f"{stem}.jsonl")
    if not args.no_plot:
        from .plotting import plot_mission

        plot_mission(mission, out / f"{stem}.png")
    print(f"{path}: {len(mission.steps)} sensors, MI(A_{len(mission.steps)}) = {mission.curve()[-1]:.6f}")
    return 0


def _methods(args) -> list[str]:
    if not args.method:
        return list(METHODS)
    names = [m.strip() for m in args.method.split(",") if m.strip()]
    bad = [m for m in names if m not in METHODS]
    if bad:
        raise ConfigError(f"unknown method(s) {bad}; expected {METHODS}")
    return names


def cmd_compare(args) -> int:
    cfg = _load(args)
    mission, runs = cfg.mission, cfg.sweep.runs
    dev = mission.deviation
    seeds = comparison_seeds(mission.seed, dev.w1, dev.w2, runs)
    result = compare_methods(mission, _methods(args), seeds, workers=args.threads)
    out = _out(args)
    records.write_curves(result, out)
    records.write_mean_curves(result, out)
    if not args.no_plot:
        from .plotting import plot_mean_curves

        plot_mean_curves(result, out / "mi_curves.png", f"(w1, w2) = ({dev.w1:g}, {dev.w2:g}), {runs} runs")
    n = mission.n_max
    for m in result.methods:
        if result.runs[m]:
            print(f"{m:9s} mean MI(A_{n}) = {result.mean_curve(m)[-1]:.4f}  ({len(result.runs[m])} runs, {len(result.failures[m])} failed)")
    return 0


def cmd_sweep(args) -> int:
    spec = _load(args).sweep
    result = sensitivity_sweep(spec, workers=args.threads)
    out = _out(args)
    records.write_sweep(result, out)
    records.write_sweep_runs(result, out)
    records.write_sweep_ranks(result, out)
    if not args.no_plot:
        from .plotting import plot_delta_tables

        plot_delta_tables(result, out / "delta_tables.png")
    cells = len(result.cells)
    print(f"{result.mission_count} missions over {cells} cells")
    for n in sorted(spec.checkpoints):
        print(f"Delta_{n} > 0 in {result.positive_cells(n)}/{cells} cells")
    return 0


def cmd_verify(args) -> int:
    results = run_all(small=args.small, seed=args.seed or 0)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sumoss", description="Sensor scattering planner and simulation benchmark.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, method=True, out=True, threads=False):
        p.add_argument("--config", metavar="PATH", help="TOML run configuration")
        p.add_argument("--seed", type=int, help="mission seed (master seed for compare/sweep)")
        p.add_argument("--samples", type=int, help="joint deviation samples for the expectation")
        if method:
            p.add_argument("--method", help="sumoss | baseline | random (comma list for compare)")
        if out:
            p.add_argument("--out", default="out", metavar="DIR")
            p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
        if threads:
            p.add_argument("--threads", type=int, default=1, help="parallel worker processes")
            p.add_argument("--runs", type=int, help="runs per setting (overrides [sweep].runs)")

    p = sub.add_parser("plan", help="print the next drop target for a state file")
    common(p, out=False)
    p.add_argument("--state", required=True, metavar="PATH", help='JSON file {"chosen": [indices...]}')
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="run one mission and write its log")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="paired comparison of planners, writes curves.csv")
    common(p, threads=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="(w1, w2) sensitivity sweep, writes sweep.csv")
    common(p, method=False, threads=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the oracle suites")
    p.add_argument("--small", action="store_true", help="fewer random instances")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SumossError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
