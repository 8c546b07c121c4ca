"""Survival curves of the barrier-shell model: CSV plus SVG in the style of the decay figure.

    python3 scripts/reproduce_survival_figure.py --out figures/
"""

import argparse
from pathlib import Path

from resdecay import cli


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="figures", help="output directory")
    parser.add_argument("--N", type=int, default=200, help="number of poles")
    parser.add_argument("--T-lifetimes", type=float, default=None,
                        help="Ersak time in lifetimes instead of the absolute T = 1000")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    argv = ["survival", "--N", str(args.N), "--set", "time.max_lifetimes=60",
            "--out-csv", str(out / "survival.csv"), "--out-svg", str(out / "survival.svg")]
    if args.T_lifetimes is not None:
        argv += ["--T-lifetimes", str(args.T_lifetimes)]
    raise SystemExit(cli.main(argv))


if __name__ == "__main__":
    main()
