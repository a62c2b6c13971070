"""Squared Frobenius error of the regression coefficients against n.

Fits log F2 = a + b log n over the bundled n-grid for each scenario and
prints b with its standard error.

    python scripts/run_rate_study.py --scenario continuous --lam 5
    python scripts/run_rate_study.py --scenario circular --lam 0.5 --max-n 5000
"""

import argparse
import os

from gcpc.simulation import SimCampaign, run_campaign


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--scenario", choices=("circular", "continuous", "both"), default="continuous")
    ap.add_argument("--lam", type=float, default=5.0)
    ap.add_argument("--replicates", type=int, default=20)
    ap.add_argument("--max-n", type=int, default=2000)
    ap.add_argument("--step", type=int, default=100)
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args()
    c = SimCampaign(
        study="convergence_rate",
        replicates=args.replicates,
        sample_sizes=list(range(100, args.max_n + 1, args.step)),
        true_params={"scenario": args.scenario, "lambda": args.lam},
        seed=args.seed,
        parallelism=args.jobs,
    )
    rep = run_campaign(c)
    print(f"{'n':>6} {'mean F2':>12} {'n * F2':>10}")
    for cell in rep.cells:
        print(f"{cell['n']:>6} {cell['mean_frob2']:>12.5g} {cell['n'] * cell['mean_frob2']:>10.1f}")
    print(f"b = {rep.slope:.3f} (se {rep.slope_se:.3f}), {rep.runtime_s:.0f} s")
    for w in rep.warnings:
        print("warning:", w)


if __name__ == "__main__":
    main()
