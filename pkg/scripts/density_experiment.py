"""Sampled point density against the limit density, plus the finite-n kernel diagonal.

    python3 scripts/density_experiment.py --n 100 --k 400 --gamma -0.5 --count 200
"""
import argparse
import json

from qkrawtchouk.cli import ExperimentConfig, density_experiment, kernel_deviation


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--k", type=int, default=400)
    ap.add_argument("--gamma", type=float, default=-0.5)
    ap.add_argument("--spec", default="pp")
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--bins", type=int, default=50)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--kernel-n", type=int, default=800)
    args = ap.parse_args()
    cfg = ExperimentConfig(
        command="density", n=args.n, k=args.k, gamma=args.gamma, spec=args.spec,
        count=args.count, bins=args.bins, seed=args.seed, workers=args.workers,
    )
    ex = density_experiment(cfg)
    c = args.k / args.n
    dev = kernel_deviation(args.kernel_n, c, args.gamma, args.spec)
    print(json.dumps({"sup_distance": ex["sup_distance"], "kernel_deviation": dev, "kernel_n": args.kernel_n}, indent=1))


if __name__ == "__main__":
    main()
