"""Monte Carlo variance of a linear statistic against the limiting Gaussian variance.

    python3 scripts/clt_experiment.py --n 40 --k 80 --gamma 1 --count 5000 --f s
"""
import argparse
import json

from qkrawtchouk.cli import TEST_FUNCTIONS, ExperimentConfig, cmd_clt


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=40)
    ap.add_argument("--k", type=int, default=80)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--spec", default="pp")
    ap.add_argument("--count", type=int, default=5000)
    ap.add_argument("--f", choices=sorted(TEST_FUNCTIONS), default="s")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    cfg = ExperimentConfig(command="clt", **vars(args))
    out = cmd_clt(cfg).payload
    print(json.dumps({k: out[k] for k in ("a", "b", "sigma2", "experiment")}, indent=1))


if __name__ == "__main__":
    main()
