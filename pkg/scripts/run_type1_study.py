"""Type I error tables for the one- and two-sample location tests.

    python scripts/run_type1_study.py            # desk scale (500 replicates)
    python scripts/run_type1_study.py --full     # full grids, 1000 / 500 replicates
"""

import argparse
import os
from pathlib import Path

from gcpc.cli import _resolve_config
from gcpc.simulation import campaign_from_dict, run_campaign


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("one_sample", "two_sample"):
        cfg = name + "_full" if args.full else name
        c = _resolve_config(cfg)
        c = campaign_from_dict({"schema_version": 1, **c.to_dict(), "parallelism": args.jobs})
        rep = run_campaign(c)
        (out / f"{cfg}.json").write_text(rep.to_json() + "\n")
        (out / f"{cfg}.csv").write_text(rep.to_csv())
        print(f"{cfg}: {rep.runtime_s:.0f} s")
        print(rep.to_csv())


if __name__ == "__main__":
    main()
