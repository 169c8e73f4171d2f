"""Command-line entry point: ``qkraw <command> [options]``.

Every option can also come from a TOML file given with ``--config``; keys
are the long option names with dashes replaced by underscores.  Explicit
flags override the file.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import struct
import sys
from dataclasses import dataclass, fields
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import stats

from . import asymptotics as asy
from . import partitions as P
from .ensemble import EigenMatchError, gram_matrix, spectral_kernel
from .measures import (
    ModelParams,
    Spec,
    determinantal_weight,
    distribution,
    normalizing_constant,
    one_point_marginals,
    prob,
    prob_determinantal,
    weight,
)
from .render import render_svg
from .sampler import empirical_density, linear_statistic, sample_dpp, sample_exact

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SCHEMA_VERSION = 1
VERIFY_BOX_LIMIT = 10
KERNEL_TOL = 1e-10
GRAM_TOL = 1e-10
GRAM_DIGITS = 40
FLOAT_EXACT_TOL = 1e-12
COMMANDS = ("verify", "prob", "enumerate", "kernel", "sample", "density", "shape", "clt", "render")


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str = "verify"
    n: int = 2
    k: int = 2
    q: str | None = None
    gamma: float | None = None
    spec: str = "pp"
    seed: int = 0
    out: str | None = None
    format: str | None = None
    count: int | None = None
    method: str = "dpp"
    grid: int = 201
    bins: int = 50
    lam: str | None = None
    f: str = "s"
    matrix: str | None = None
    sample: str | None = None
    index: int = 0
    overlay: bool = False
    workers: int = 1
    corrupt_weight: float | None = None

    @property
    def fmt(self) -> str:
        if self.format:
            return self.format
        return "svg" if self.command == "render" else "json"

    def model(self) -> ModelParams:
        if self.q is not None:
            return ModelParams(self.n, self.k, str(self.q), Spec(self.spec))
        if self.gamma is not None:
            return ModelParams.from_gamma(self.n, self.k, self.gamma, Spec(self.spec))
        raise UsageError("give --q or --gamma")

    def limit(self) -> asy.LimitParams:
        if self.gamma is None:
            raise UsageError("this command needs --gamma")
        return asy.LimitParams(self.gamma, self.k / self.n, Spec(self.spec))


# ---------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = common.add_argument_group("model and output")
    g.add_argument("--config", help="TOML file with default option values")
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--q", help="rational ('1/2') or decimal q")
    g.add_argument("--gamma", type=float, help="use q = exp(-gamma / n)")
    g.add_argument("--spec", choices=[s.value for s in Spec])
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--format", choices=["json", "csv", "svg"])
    g.add_argument("--workers", type=int)

    parser = argparse.ArgumentParser(prog="qkraw", description="Random diagrams in a box and their q-Krawtchouk ensembles.")
    sub = parser.add_subparsers(dest="command", required=True)
    cmds = {name: sub.add_parser(name, parents=[common], argument_default=argparse.SUPPRESS) for name in COMMANDS}
    cmds["verify"].add_argument("--corrupt-weight", type=float, help=argparse.SUPPRESS)
    cmds["prob"].add_argument("--lam", help="comma-separated rows, e.g. 3,1")
    cmds["kernel"].add_argument("--matrix", help="write the full kernel here (uint64 size, then float64 rows)")
    cmds["sample"].add_argument("--count", type=int)
    cmds["sample"].add_argument("--method", choices=["exact", "dpp"])
    for name in ("density", "shape", "render"):
        cmds[name].add_argument("--grid", type=int, help="number of grid points")
    cmds["density"].add_argument("--count", type=int, help="also sample this many diagrams and compare")
    cmds["density"].add_argument("--bins", type=int)
    cmds["clt"].add_argument("--f", choices=sorted(TEST_FUNCTIONS))
    cmds["clt"].add_argument("--count", type=int, help="also estimate the variance from this many samples")
    cmds["render"].add_argument("--lam")
    cmds["render"].add_argument("--sample", help="JSON output of the sample command")
    cmds["render"].add_argument("--index", type=int)
    cmds["render"].add_argument("--overlay", action="store_true", help="draw the limit shape (needs --gamma)")
    return parser


def load_config(argv: list[str] | None = None) -> ExperimentConfig:
    ns = vars(build_parser().parse_args(argv))
    values: dict = {}
    path = ns.pop("config", None)
    if path:
        with open(path, "rb") as fh:
            values.update(tomllib.load(fh))
    values.update(ns)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**values)


# ---------------------------------------------------------------------------
# output


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def to_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])
    return buf.getvalue()


def _json_safe(x):
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, np.ndarray):
        return _json_safe(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


def to_json(payload: dict) -> str:
    return json.dumps({"schema": SCHEMA_VERSION, **_json_safe(payload)}, indent=1) + "\n"


@dataclass
class Output:
    payload: dict
    header: list[str] | None = None
    rows: list | None = None
    svg: str | None = None
    status: int = 0

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return to_json(self.payload)
        if fmt == "csv":
            if self.header is None:
                raise UsageError("this command has no CSV form")
            return to_csv(self.header, self.rows)
        if self.svg is None:
            raise UsageError("only the render command produces SVG")
        return self.svg


def decimal_string(x) -> str:
    if isinstance(x, Fraction):
        with localcontext() as ctx:
            ctx.prec = 17
            return str(Decimal(x.numerator) / Decimal(x.denominator))
    return format(float(x), ".17g")


def rational_string(x) -> str:
    return str(x if isinstance(x, Fraction) else Fraction(float(x)))


def partition_key(lam) -> str:
    return ",".join(str(x) for x in lam)


def parse_partition(text: str | None) -> tuple[int, ...]:
    if text is None:
        raise UsageError("give --lam")
    text = text.strip().strip("()[]")
    return tuple(int(x) for x in text.split(",") if x.strip()) if text else ()


# ---------------------------------------------------------------------------
# commands


def _check(passed: bool, error=None, skipped: bool = False) -> dict:
    return {"passed": bool(passed), "error": None if error is None else float(error), "skipped": skipped}


def verify_report(mp: ModelParams, corrupt_weight: float | None = None) -> dict:
    """Run the exact identity suite on one box."""
    checks: dict = {}
    enumerable = mp.n + mp.k <= VERIFY_BOX_LIMIT
    degenerate = mp.q == 1

    w_fn = weight
    if corrupt_weight is not None:
        w_fn = lambda a, p: weight(a, p) * ((1 + corrupt_weight) if a == 0 else 1)

    def close(x, y) -> tuple[bool, float]:
        if mp.exact:
            return x == y, abs(float(x - y))
        err = abs(float(x) - float(y))
        return err <= FLOAT_EXACT_TOL * max(1.0, abs(float(y))), err

    if enumerable:
        dist = distribution(mp)
        ok1, e1 = close(sum(dist.values()), 1)
        if degenerate:
            ok2, e2 = True, 0.0
        else:
            z = sum(determinantal_weight(lam, mp, w_fn) for lam in dist) * normalizing_constant(mp)
            ok2, e2 = close(z, 1)
        checks["normalization"] = _check(ok1 and ok2, max(e1, e2))
        if degenerate:
            checks["forms"] = _check(True, skipped=True)
        else:
            errs = [close(prob_determinantal(lam, mp), pr) for lam, pr in dist.items()]
            checks["forms"] = _check(all(ok for ok, _ in errs), max(e for _, e in errs))
    else:
        checks["normalization"] = _check(True, skipped=True)
        checks["forms"] = _check(True, skipped=True)

    if degenerate:
        for name in ("kernel_diagonal", "orthogonality", "eigenvalues"):
            checks[name] = _check(True, skipped=True)
        return checks
    mpf = ModelParams(mp.n, mp.k, float(mp.q), mp.spec)
    try:
        K = spectral_kernel(mpf)
        checks["eigenvalues"] = _check(True, K.eigen_mismatch)
    except EigenMatchError:
        K = None
        checks["eigenvalues"] = _check(False)
    if K is not None and enumerable:
        marg = np.array([float(x) for x in one_point_marginals(mp)])
        err = float(np.max(np.abs(K.diagonal() - marg)))
        checks["kernel_diagonal"] = _check(err <= KERNEL_TOL, err)
    else:
        checks["kernel_diagonal"] = _check(K is not None, skipped=K is not None)
    G = gram_matrix(mpf, digits=GRAM_DIGITS)
    err = float(np.max(np.abs(G - np.eye(G.shape[0]))))
    checks["orthogonality"] = _check(err <= GRAM_TOL, err)
    return checks


def cmd_verify(cfg: ExperimentConfig) -> Output:
    mp = cfg.model()
    checks = verify_report(mp, cfg.corrupt_weight)
    passed = all(c["passed"] for c in checks.values())
    rows = [(name, c["passed"], "" if c["error"] is None else c["error"], c["skipped"]) for name, c in checks.items()]
    return Output(
        {"command": "verify", "params": mp.to_dict(), "checks": checks, "passed": passed},
        ["check", "passed", "error", "skipped"],
        rows,
        status=0 if passed else 1,
    )


def _prob_output(mp: ModelParams, items) -> Output:
    table = {partition_key(lam): {"decimal": decimal_string(p), "rational": rational_string(p)} for lam, p in items}
    rows = [(key, v["decimal"], v["rational"]) for key, v in table.items()]
    return Output({"params": mp.to_dict(), "probabilities": table}, ["partition", "decimal", "rational"], rows)


def cmd_prob(cfg: ExperimentConfig) -> Output:
    mp = cfg.model()
    lam = P.check_box(parse_partition(cfg.lam), mp.n, mp.k)
    return _prob_output(mp, [(lam, prob(lam, mp))])


def cmd_enumerate(cfg: ExperimentConfig) -> Output:
    mp = cfg.model()
    return _prob_output(mp, distribution(mp).items())


def write_kernel_matrix(path: str, K: np.ndarray) -> None:
    """uint64 little-endian dimension followed by the row-major float64 matrix."""
    K = np.ascontiguousarray(K, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", K.shape[0]))
        fh.write(K.tobytes(order="C"))


def read_kernel_matrix(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        (size,) = struct.unpack("<Q", fh.read(8))
        return np.frombuffer(fh.read(), dtype="<f8").reshape(size, size)


def cmd_kernel(cfg: ExperimentConfig) -> Output:
    mp = cfg.model()
    K = spectral_kernel(ModelParams(mp.n, mp.k, float(mp.q), mp.spec))
    if cfg.matrix:
        write_kernel_matrix(cfg.matrix, K.entries)
    d = K.diagonal()
    return Output({"params": mp.to_dict(), "diagonal": d}, ["a", "K"], list(zip(range(d.size), d)))


def draw(cfg: ExperimentConfig, mp: ModelParams, count: int):
    if cfg.method == "exact":
        return sample_exact(mp, count, cfg.seed)
    mpf = ModelParams(mp.n, mp.k, float(mp.q), mp.spec)
    return sample_dpp(spectral_kernel(mpf), count, cfg.seed, params=mp, workers=cfg.workers)


def cmd_sample(cfg: ExperimentConfig) -> Output:
    mp = cfg.model()
    batch = draw(cfg, mp, 1000 if cfg.count is None else cfg.count)
    payload = batch.to_dict()
    payload.pop("schema")
    header = [f"a{i}" for i in range(1, mp.n + 1)]
    return Output(payload, header, batch.samples.tolist())


def density_experiment(cfg: ExperimentConfig) -> dict:
    """Sampled histogram against the limit density averaged over the same lattice sites."""
    mp, lp = cfg.model(), cfg.limit()
    batch = draw(cfg, mp, cfg.count)
    emp = empirical_density(batch, cfg.bins)
    sites = np.round(emp.edges * mp.n).astype(int)
    rho = asy.limit_density(np.arange(mp.N + 1) / mp.n, lp)
    analytic = np.array([rho[lo:hi].mean() for lo, hi in zip(sites[:-1], sites[1:])])
    return {
        "count": cfg.count,
        "seed": cfg.seed,
        "edges": emp.edges,
        "centers": emp.centers,
        "empirical": emp.density,
        "analytic": analytic,
        "sup_distance": float(np.max(np.abs(emp.density - analytic))),
    }


def kernel_deviation(n: int, c: float, gamma: float, spec: str = "pp", margin: float = 0.2) -> float:
    """max |K(a, a) - rho(a / n)| over a / n in [margin, c + 1 - margin]."""
    mp = ModelParams.from_gamma(n, int(round(c * n)), gamma, spec)
    lp = asy.LimitParams(gamma, c, spec)
    t = np.arange(mp.N + 1) / n
    inner = (t >= margin) & (t <= lp.length - margin)
    diag = spectral_kernel(mp).diagonal()
    return float(np.max(np.abs(diag - asy.limit_density(t, lp))[inner]))


def cmd_density(cfg: ExperimentConfig) -> Output:
    lp = cfg.limit()
    t = np.linspace(0, lp.length, cfg.grid)
    rho = asy.limit_density(t, lp)
    payload = {"params": {**lp.to_dict(), "n": cfg.n, "k": cfg.k}, "t": t, "rho": rho}
    if cfg.count:
        ex = density_experiment(cfg)
        payload["experiment"] = ex
        return Output(payload, ["x", "empirical", "analytic"], list(zip(ex["centers"], ex["empirical"], ex["analytic"])))
    return Output(payload, ["t", "rho"], list(zip(t, rho)))


def cmd_shape(cfg: ExperimentConfig) -> Output:
    lp = cfg.limit()
    x = np.linspace(0, lp.length, cfg.grid)
    f = asy.limit_shape(x, lp)
    return Output({"params": lp.to_dict(), "x": x, "f": f}, ["x", "f"], list(zip(x, f)))


TEST_FUNCTIONS: dict[str, Callable[[float, float], Callable[[np.ndarray], np.ndarray]]] = {
    "one": lambda a, b: (lambda s: np.ones_like(s)),
    "s": lambda a, b: (lambda s: s),
    "s2": lambda a, b: (lambda s: s**2),
    "expwindow": lambda a, b: (lambda s: np.exp(-(((s - b) / (2 * a)) ** 2))),
}


def clt_experiment(cfg: ExperimentConfig, f, sigma2: float) -> dict:
    batch = draw(cfg, cfg.model(), cfg.count)
    X = linear_statistic(batch, f)
    var = float(np.var(X, ddof=1))
    sd = math.sqrt(var)
    z = (X - X.mean()) / sd if sd > 0 else np.zeros_like(X)
    return {
        "count": cfg.count,
        "seed": cfg.seed,
        "mean": float(X.mean()),
        "variance": var,
        "ratio": var / sigma2 if sigma2 > 0 else None,
        "skewness": float(stats.skew(z)) if sd > 0 else 0.0,
        "excess_kurtosis": float(stats.kurtosis(z)) if sd > 0 else 0.0,
    }


def cmd_clt(cfg: ExperimentConfig) -> Output:
    lp = cfg.limit()
    a, b = asy.recurrence_limits(lp)
    f = TEST_FUNCTIONS[cfg.f](a, b)
    sigma2 = asy.clt_variance(f, ab=(a, b))
    payload = {"params": {**lp.to_dict(), "n": cfg.n, "k": cfg.k}, "f": cfg.f, "a": a, "b": b, "sigma2": sigma2}
    if cfg.count:
        payload["experiment"] = clt_experiment(cfg, f, sigma2)
    rows = [(key, val) for key, val in payload.items() if key in ("a", "b", "sigma2")]
    rows += [(key, val) for key, val in payload.get("experiment", {}).items() if val is not None]
    return Output(payload, ["quantity", "value"], rows)


def cmd_render(cfg: ExperimentConfig) -> Output:
    n, k = cfg.n, cfg.k
    lam = None
    if cfg.lam is not None:
        lam = P.check_box(parse_partition(cfg.lam), n, k)
    elif cfg.sample:
        with open(cfg.sample) as fh:
            data = json.load(fh)
        n, k = data["params"]["n"], data["params"]["k"]
        lam = P.from_coords(data["samples"][cfg.index], n)
    overlay = None
    if cfg.overlay:
        lp = asy.LimitParams(cfg.limit().gamma, k / n, Spec(cfg.spec))
        x = np.linspace(0, lp.length, cfg.grid)
        overlay = (x, asy.limit_shape(x, lp))
    title = f"n={n} k={k}" + (f" lambda={partition_key(lam)}" if lam is not None else "")
    svg = render_svg(lam, n, k, overlay=overlay, title=title)
    return Output({"n": n, "k": k, "partition": lam}, svg=svg)


HANDLERS = {
    "verify": cmd_verify,
    "prob": cmd_prob,
    "enumerate": cmd_enumerate,
    "kernel": cmd_kernel,
    "sample": cmd_sample,
    "density": cmd_density,
    "shape": cmd_shape,
    "clt": cmd_clt,
    "render": cmd_render,
}


def run(cfg: ExperimentConfig) -> tuple[str, int]:
    out = HANDLERS[cfg.command](cfg)
    return out.render(cfg.fmt), out.status


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = load_config(argv)
        text, status = run(cfg)
    except (UsageError, P.BoxError, OverflowError) as exc:
        print(f"qkraw: error: {exc}", file=sys.stderr)
        return 2
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
