"""Limit densities and limit shapes at c = 4 over a grid of gamma, one CSV per curve.

    python3 scripts/figure_data.py --out figure_data --grid 801
"""
import argparse
from pathlib import Path

import numpy as np

from qkrawtchouk.asymptotics import LimitParams, limit_density, limit_shape
from qkrawtchouk.cli import to_csv

GAMMAS = (-10, -2, -0.5, -0.1, -0.01, 0.01, 0.1, 0.5, 2, 10)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figure_data")
    ap.add_argument("--c", type=float, default=4.0)
    ap.add_argument("--grid", type=int, default=801)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for spec in ("pp", "pip"):
        for g in GAMMAS:
            lp = LimitParams(g, args.c, spec)
            x = np.linspace(0, lp.length, args.grid)
            tag = f"{spec}_gamma{g:+g}"
            if g < 0:
                (out / f"density_{tag}.csv").write_text(to_csv(["t", "rho"], zip(x, limit_density(x, lp))))
            (out / f"shape_{tag}.csv").write_text(to_csv(["x", "f"], zip(x, limit_shape(x, lp))))
            print("wrote", tag)


if __name__ == "__main__":
    main()
