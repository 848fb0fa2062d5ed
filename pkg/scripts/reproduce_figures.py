"""Run the four figure presets and write CSV and SVG output for each.

    python scripts/reproduce_figures.py --out results --workers 4
    python scripts/reproduce_figures.py --only fig4 --runs 20
"""

import argparse
import time
from pathlib import Path

from scalebandits.config import PRESETS, apply_overrides, preset
from scalebandits.output import emit_csv, emit_svg
from scalebandits.simulator import run_experiment_full

LOG_X = {"fig2": True}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results")
    parser.add_argument("--only", nargs="*", choices=PRESETS, default=list(PRESETS))
    parser.add_argument("--runs", type=int, help="override the preset run count")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--fig3-t0", type=int, help="cold-start length for fig3")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    for name in args.only:
        cfg = preset(name, t0=args.fig3_t0 if name == "fig3" else None)
        cfg = apply_overrides(cfg, runs=args.runs, master_seed=args.seed, out_dir=args.out)
        start = time.perf_counter()
        result = run_experiment_full(cfg, workers=args.workers)
        emit_csv(result, cfg.out_dir)
        emit_svg(result.curves, Path(cfg.out_dir) / f"{name}.svg", log_x=LOG_X.get(name, False),
                 title=f"{name}: raw means {list(cfg.raw_means)}, {cfg.schedule.describe()}")
        print(f"== {name} (T={cfg.horizon}, runs={cfg.runs}, "
              f"{time.perf_counter() - start:.0f}s)")
        for pid, curve in sorted(result.curves.items(), key=lambda kv: kv[1].final_mean):
            print(f"   {pid:<9} {curve.final_mean:>11.1f} ± {curve.final_stderr:.1f}")


if __name__ == "__main__":
    main()
