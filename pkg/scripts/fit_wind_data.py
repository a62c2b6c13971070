"""Fits to the wind direction data (CIPC, GCPC, regression on speed).

    Rscript scripts/export_wind_data.R wind.csv
    python scripts/fit_wind_data.py wind.csv
"""

import argparse
import csv

import numpy as np

from gcpc import (
    build_design,
    classify_unimodality,
    compare_regressions,
    fit_cipc,
    fit_gcpc,
    fit_regression,
    location_ci,
    lrt_gcpc_vs_cipc,
    parse_predictor,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv")
    ap.add_argument("--degrees", action="store_true", help="directions are in degrees")
    args = ap.parse_args()
    with open(args.csv, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    th = np.array([float(r["direction"]) for r in rows])
    if args.degrees:
        th = np.deg2rad(th)
    speed = np.array([float(r["speed"]) for r in rows])

    c, g = fit_cipc(th), fit_gcpc(th)
    for f in (c, g):
        p = f.params
        se = f.std_errors or {}
        print(f"{f.family}: omega {p.omega:.3f} gamma {p.gamma:.3f} lambda {p.lam:.3f} loglik {f.loglik:.3f}", se)
    print("modes:", classify_unimodality(g.params))
    print("lambda = 1:", lrt_gcpc_vs_cipc(th).to_dict()["p_value"])
    ci = location_ci(th, fit=g)
    print(f"95% location interval ({ci.lower:.3f}, {ci.upper:.3f})")

    design = build_design([parse_predictor("continuous:speed")], {"speed": speed})
    rg = fit_regression(design, th)
    rc = fit_regression(design, th, family="cipc")
    for f in (rc, rg):
        print(f"{f.family} regression: coef {np.round(f.coef, 4).tolist()} lambda {f.lam:.3f} loglik {f.loglik:.3f}")
    print("regression lambda = 1 p-value:", compare_regressions(rg, rc).p_value)
    print(f"residual rho {rg.rho_hat:.3f} (se {rg.rho_se:.3f}); n = {th.size}")


if __name__ == "__main__":
    main()
