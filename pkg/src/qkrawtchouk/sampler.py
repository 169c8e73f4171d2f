"""Exact and determinantal samplers for random diagrams in the box.

Randomness is addressed per sample: draw ``i`` of a batch with seed ``s``
reads its words from a Philox stream keyed by ``s`` starting at counter
``i * blocks``, so a draw does not depend on batch size, chunking or the
order in which chunks are processed.
"""
from __future__ import annotations

from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import stats

from . import partitions as P
from .ensemble import KernelMatrix
from .measures import ModelParams, distribution

FIXED_POINT_BITS = 128
TRACE_TOL = 1e-6
NEGATIVE_PROB_TOL = 1e-9
CHUNK_ELEMENTS = 1 << 22


def random_words(seed: int, start: int, count: int, words: int) -> np.ndarray:
    """uint64 words for samples start..start+count-1, ``words`` per sample."""
    blocks = -(-words // 4)
    gen = np.random.Philox(key=int(seed), counter=int(start) * blocks)
    raw = gen.random_raw(count * blocks * 4).reshape(count, blocks * 4)
    return raw[:, :words]


def uniforms(seed: int, start: int, count: int, width: int) -> np.ndarray:
    """Doubles in [0, 1) with 53 random bits, addressed like :func:`random_words`."""
    return (random_words(seed, start, count, width) >> np.uint64(11)).astype(np.float64) * 2.0**-53


@dataclass
class SampleBatch:
    params: ModelParams
    seed: int
    samples: np.ndarray  # (count, n) strictly decreasing coordinates
    method: str

    def __len__(self) -> int:
        return self.samples.shape[0]

    def partitions(self) -> list[P.Partition]:
        n = self.params.n
        return [P.from_coords(row, n) for row in self.samples]

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "params": self.params.to_dict(),
            "seed": int(self.seed),
            "method": self.method,
            "samples": self.samples.tolist(),
        }


def sample_exact(mp: ModelParams, count: int, seed: int, cap: int = P.DEFAULT_ENUMERATION_CAP) -> SampleBatch:
    """Inverse-CDF sampling over the enumerated box with an exact rational CDF."""
    n = mp.n
    if count == 0:
        return SampleBatch(mp, seed, np.zeros((0, n), dtype=np.int64), "exact")
    exact = mp if mp.exact else ModelParams(mp.n, mp.k, Fraction(mp.q), mp.spec)
    dist = distribution(exact, cap=cap)
    lams = list(dist)
    scale = 1 << FIXED_POINT_BITS
    cum = Fraction(0)
    thresholds = []
    for lam in lams:
        cum += dist[lam]
        thresholds.append(cum.numerator * scale // cum.denominator)
    thresholds[-1] = scale
    coords = np.array([P.to_coords(lam, n) for lam in lams], dtype=np.int64)
    words = random_words(seed, 0, count, 2)
    out = np.empty((count, n), dtype=np.int64)
    for i, (hi, lo) in enumerate(words):
        u = (int(hi) << 64) | int(lo)
        out[i] = coords[bisect_right(thresholds, u)]
    return SampleBatch(mp, seed, out, "exact")


def sample_dpp(
    kernel: KernelMatrix,
    count: int,
    seed: int,
    n: int | None = None,
    params: ModelParams | None = None,
    chunk_elements: int = CHUNK_ELEMENTS,
    workers: int = 1,
) -> SampleBatch:
    """Sequential conditioning for a projection kernel K = V V^T.

    Each step picks a site with probability K(a, a) / (remaining steps) and
    conditions on it.  With K stored as V V^T the Schur-complement update
    K - K[:, a] K[a, :] / K[a, a] is V (I - w w^T / |w|^2) V^T with w = V[a],
    so the factor is updated instead of the full matrix.

    Chunks of draws are independent (randomness is keyed by draw index), so
    ``workers > 1`` runs them on a thread pool with identical output.
    """
    V = np.asarray(kernel.basis, dtype=float)
    L, r = V.shape
    n = r if n is None else n
    params = params if params is not None else kernel.params
    if abs(kernel.trace() - n) > TRACE_TOL or r != n:
        raise ValueError(f"kernel is not a rank-{n} projection (trace {kernel.trace():.8f})")
    out = np.empty((count, n), dtype=np.int64)
    per_chunk = max(1, chunk_elements // max(1, L * r))
    starts = range(0, count, per_chunk)

    def run(start: int) -> None:
        m = min(per_chunk, count - start)
        out[start : start + m] = _dpp_chunk(V, seed, start, m)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, starts))
    else:
        for start in starts:
            run(start)
    out = -np.sort(-out, axis=1)
    return SampleBatch(params, seed, out, "dpp")


def _dpp_chunk(V: np.ndarray, seed: int, start: int, m: int) -> np.ndarray:
    L, r = V.shape
    Vb = np.broadcast_to(V, (m, L, r)).copy()
    U = uniforms(seed, start, m, r)
    rows = np.arange(m)
    picked = np.empty((m, r), dtype=np.int64)
    for step in range(r):
        d = np.einsum("mlr,mlr->ml", Vb, Vb)
        if d.min() < -NEGATIVE_PROB_TOL:
            raise FloatingPointError(f"negative conditional probability {d.min():.3e}")
        np.clip(d, 0.0, None, out=d)
        cum = np.cumsum(d, axis=1)
        target = U[:, step] * cum[:, -1]
        idx = np.minimum((cum <= target[:, None]).sum(axis=1), L - 1)
        picked[:, step] = idx
        w = Vb[rows, idx, :]
        w /= np.linalg.norm(w, axis=1, keepdims=True)
        coef = np.einsum("mlr,mr->ml", Vb, w)
        Vb -= coef[:, :, None] * w[:, None, :]
        Vb[rows, idx, :] = 0.0
    return picked


@dataclass
class EmpiricalDensity:
    edges: np.ndarray  # bin edges in x = a / n
    mass: np.ndarray  # mean number of points per bin; sums to n
    density: np.ndarray  # mean occupation fraction per lattice site, comparable to rho

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def empirical_density(batch: SampleBatch, bins: int) -> EmpiricalDensity:
    """Histogram of x = a / n with bins made of whole lattice sites."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    n, L = batch.params.n, batch.params.N + 1
    site_edges = np.unique(np.round(np.linspace(0, L, min(bins, L) + 1)).astype(int))
    counts, _ = np.histogram(batch.samples.ravel(), bins=site_edges)
    mass = counts / len(batch)
    sites = np.diff(site_edges)
    return EmpiricalDensity(edges=site_edges / n, mass=mass, density=mass / sites)


def lattice_variable(params: ModelParams, coords) -> np.ndarray:
    """s = q^{-a}, the variable of the orthogonal polynomials (exp(gamma a / n))."""
    return np.exp(-np.asarray(coords, dtype=float) * params.log_q)


def linear_statistic(batch: SampleBatch, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """X_f = sum_i f(q^{-a_i}) for each sample."""
    s = lattice_variable(batch.params, batch.samples)
    return np.asarray(f(s), dtype=float).reshape(s.shape).sum(axis=1)


def dpp_linear_variance(kernel: KernelMatrix, values: np.ndarray) -> float:
    """Exact Var(sum_i g(a_i)) for the projection DPP: sum g^2 K_aa - sum g_a g_b K_ab^2."""
    K = kernel.entries
    g = np.asarray(values, dtype=float)
    return float(g**2 @ np.diag(K) - g @ (K**2) @ g)


def chi_square_test(batch: SampleBatch, dist: dict) -> tuple[float, float]:
    """Pearson chi-square of the sampled diagrams against exact probabilities."""
    index = {P.to_coords(lam, batch.params.n): i for i, lam in enumerate(dist)}
    observed = np.zeros(len(dist))
    for row in batch.samples:
        observed[index[tuple(int(a) for a in row)]] += 1
    expected = np.array([float(p) for p in dist.values()]) * len(batch)
    res = stats.chisquare(observed, expected)
    return float(res.statistic), float(res.pvalue)
