"""Command line: ``scalebandits run`` and ``scalebandits describe``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .config import PRESETS, ConfigError, apply_overrides, describe, parse_config, preset
from .output import emit_csv, emit_svg
from .policies import POLICY_IDS
from .simulator import run_experiment_full


def _policy_list(text: str) -> list[str]:
    pols = [p.strip() for p in text.split(",") if p.strip()]
    unknown = [p for p in pols if p not in POLICY_IDS]
    if unknown or not pols:
        raise argparse.ArgumentTypeError(f"unknown policies {unknown}; choose from {POLICY_IDS}")
    return pols


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scalebandits", description="Bandit experiments under adversarial scaling.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write CSV + SVG")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESETS)
    src.add_argument("--config", type=Path)
    run.add_argument("--seed", type=int)
    run.add_argument("--runs", type=int)
    run.add_argument("--horizon", type=int)
    run.add_argument("--t0", type=int, help="cold-start length (fig3/fig4 presets only)")
    run.add_argument("--policies", type=_policy_list, help="comma-separated policy ids")
    run.add_argument("--out", help="output directory")
    run.add_argument("--log-x", action="store_true", help="log-scaled round axis in the SVG")
    run.add_argument("--workers", type=int, default=1)

    desc = sub.add_parser("describe", help="print a preset's expanded configuration")
    desc.add_argument("--preset", choices=PRESETS, required=True)
    return parser


def _run(args) -> int:
    if args.config is not None:
        if args.t0 is not None:
            raise ConfigError("--t0 applies to presets; set t0 in the config file instead")
        cfg = parse_config(args.config)
    else:
        if args.t0 is not None and args.preset not in ("fig3", "fig4"):
            raise ConfigError("--t0 only applies to the cold-start presets fig3 and fig4")
        cfg = preset(args.preset, t0=args.t0)
    try:
        cfg = apply_overrides(cfg, master_seed=args.seed, runs=args.runs, horizon=args.horizon,
                              policies=args.policies, out_dir=args.out)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    start = time.perf_counter()
    result = run_experiment_full(cfg, workers=args.workers)
    runs_csv, agg_csv = emit_csv(result, cfg.out_dir)
    svg = emit_svg(result.curves, Path(cfg.out_dir) / f"{cfg.name}.svg", log_x=args.log_x,
                   title=f"{cfg.name}: raw means {list(cfg.raw_means)}, {cfg.schedule.describe()}")

    print(f"{cfg.name}: T={cfg.horizon}, runs={cfg.runs}, seed={cfg.master_seed} "
          f"({time.perf_counter() - start:.1f}s)")
    print(f"{'policy':<10} {'mean regret':>12} {'stderr':>9}")
    for pid, curve in sorted(result.curves.items(), key=lambda kv: kv[1].final_mean):
        print(f"{pid:<10} {curve.final_mean:>12.2f} {curve.final_stderr:>9.2f}")
    for path in (runs_csv, agg_csv, svg):
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "describe":
            print(describe(args.preset))
            return 0
        return _run(args)
    except (ConfigError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
