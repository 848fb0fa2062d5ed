"""Final mean regret against horizon, to see logarithmic versus linear growth.

Each horizon is a separate experiment, since AAEAS and AAE tune their
confidence level to the horizon.

    python scripts/horizon_sweep.py --policies aaeas broad --schedule "constant(1.0)"
    python scripts/horizon_sweep.py --policies ucb aaeas --schedule "targeted_zero(1.0, 1.0)"
"""

import argparse

from scalebandits.config import parse_schedule
from scalebandits.policies import POLICY_IDS
from scalebandits.simulator import ExperimentConfig, run_experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--theta", type=float, nargs="+", default=[0.5, 0.8])
    parser.add_argument("--schedule", default="constant(1.0)")
    parser.add_argument("--policies", nargs="+", choices=POLICY_IDS, default=["aaeas", "broad"])
    parser.add_argument("--horizons", type=int, nargs="+", default=[10**3, 10**4, 10**5, 10**6])
    parser.add_argument("--runs", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    schedule = parse_schedule(args.schedule)
    print("horizon  " + "  ".join(f"{p:>18}" for p in args.policies))
    for horizon in args.horizons:
        cfg = ExperimentConfig(tuple(args.theta), schedule, tuple(args.policies), horizon=horizon,
                               runs=args.runs, master_seed=args.seed,
                               checkpoint_stride=max(100, horizon // 1000))
        curves = run_experiment(cfg, workers=args.workers)
        cells = [f"{curves[p].final_mean:>10.1f} ± {curves[p].final_stderr:<5.1f}"
                 for p in args.policies]
        print(f"{horizon:<8} " + "  ".join(cells))


if __name__ == "__main__":
    main()
