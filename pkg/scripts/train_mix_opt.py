"""Train MIX-OPT membership functions and install them as the packaged default.

    python scripts/train_mix_opt.py --iterations 200
"""
import argparse
import shutil
from pathlib import Path

from roundabout_ftc.cli import bundled_mix_opt, main


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iterations", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/mix_opt_train")
    ap.add_argument("--install", action="store_true",
                    help="copy the result over the packaged mix_opt.json")
    args = ap.parse_args(argv)
    main(["optimize", "--iterations", str(args.iterations), "--seed", str(args.seed),
          "--out", args.out])
    if args.install:
        shutil.copy(Path(args.out) / "mf.json", bundled_mix_opt())
        print(f"installed {bundled_mix_opt()}")


if __name__ == "__main__":
    run()
