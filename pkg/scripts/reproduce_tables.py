"""Run all sixteen conditions under the five controllers and write the
vehMiss / vehDelay tables plus the C8 and C16 queue traces.

    python scripts/reproduce_tables.py --seeds 0x5            # desk scale
    python scripts/reproduce_tables.py --seeds 0x3 --full     # 100k units
"""
import argparse
from pathlib import Path

from roundabout_ftc.cli import main


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", default="0x5")
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--out", default="results/tables")
    args = ap.parse_args(argv)
    out = Path(args.out)
    scale = ["--full"] if args.full else []
    main(["compare", "--conditions", "C1-C16", "--seeds", args.seeds, "--out", str(out), *scale])
    for cond in ("C8", "C16"):
        for ctrl in ("va", "turn", "jump", "mix", "mix-opt"):
            main(["simulate", "--condition", cond, "--controller", ctrl, *scale,
                  "--trace", str(out / f"trace_{cond}_{ctrl}.csv"),
                  "--out", str(out / f"run_{cond}_{ctrl}.csv")])


if __name__ == "__main__":
    run()
