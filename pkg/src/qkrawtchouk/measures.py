"""Probability measures on the n x k box coming from the dual Cauchy identity.

Two specializations of the character ratio are supported:

* ``Spec.PP``:  x_i = q^{i-1}, y_j = q^{j-1}
* ``Spec.PIP``: x_i = q^{i-1}, y_j = q^{1-j}

The measure is evaluated either as a product of two principal Schur
specializations over prod(x_i + y_j) (the authoritative normalization) or in
the determinantal form Z^{-1} prod_{i<j}(q^{-a_i} - q^{-a_j})^2 prod_i W(a_i).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import partitions as P
from .qmath import (
    Scalar,
    as_scalar,
    is_exact,
    log_q_factorials,
    log_q_numbers,
    q_binomial,
    q_factorial,
    q_number,
    q_power,
)

EXACT_SUMMATION_CAP = 200_000


class Spec(str, Enum):
    PP = "pp"
    PIP = "pip"


@dataclass(frozen=True)
class ModelParams:
    n: int
    k: int
    q: Scalar
    spec: Spec = Spec.PP

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("n and k must be positive")
        q = as_scalar(self.q)
        if q <= 0:
            raise ValueError("q must be positive")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "spec", Spec(self.spec))

    @classmethod
    def from_gamma(cls, n: int, k: int, gamma: float, spec: Spec | str = Spec.PP) -> "ModelParams":
        """Asymptotic-regime parameters with q = exp(-gamma / n)."""
        return cls(n, k, math.exp(-float(gamma) / n), Spec(spec))

    @property
    def N(self) -> int:
        return self.n + self.k - 1

    @property
    def exact(self) -> bool:
        return is_exact(self.q)

    @property
    def log_q(self) -> float:
        return math.log(self.q)

    @property
    def weight_shift(self) -> int:
        """Linear exponent in W(a) = q^{C(a,2) + a*shift} [N choose a]_q."""
        return self.n - self.k if self.spec is Spec.PP else self.n - 1

    def to_dict(self) -> dict:
        q = self.q
        return {
            "n": self.n,
            "k": self.k,
            "q": str(q) if isinstance(q, Fraction) else q,
            "spec": self.spec.value,
        }


def _one(q):
    return Fraction(1) if is_exact(q) else 1.0


# ---------------------------------------------------------------------------
# Schur functions at principal specializations


def schur_principal(lam: Sequence[int], n: int, q: Scalar) -> Scalar:
    """s_lam(1, q, ..., q^{n-1}) via the q-Weyl dimension formula."""
    lam = P.normalize(lam, n)
    a = P.to_coords(lam, n)
    val = q_power(q, P.content_stat(lam))
    for i in range(n):
        for j in range(i + 1, n):
            val = val * q_number(a[i] - a[j], q) / q_number(j - i, q)
    return val


def dual_schur_principal(lam: Sequence[int], n: int, k: int, q: Scalar) -> Scalar:
    """s_{complement_conjugate(lam)}(1, q, ..., q^{k-1}) written in the coordinates of lam."""
    lam = P.check_box(lam, n, k)
    a = P.to_coords(lam, n)
    N = n + k - 1
    val = q_power(q, P.dual_content_stat(lam, n, k))
    for i in range(n):
        for j in range(i + 1, n):
            val = val * q_number(a[i] - a[j], q)
    for l in range(1, n + 1):
        val = val * q_factorial(n + k - l, q) / (q_factorial(a[l - 1], q) * q_factorial(N - a[l - 1], q))
    return val


def schur_ssyt_oracle(lam: Sequence[int], xs: Sequence[Scalar], cap: int = 10**6) -> Scalar:
    """Brute-force sum over semistandard tableaux of shape lam with entries 1..len(xs)."""
    lam = tuple(x for x in P.normalize(lam) if x > 0)
    m = len(xs)
    cells = [(r, c) for r, row in enumerate(lam) for c in range(row)]
    if len(lam) > m:
        return 0 * (xs[0] if xs else 0)
    filling: dict[tuple[int, int], int] = {}
    total = [0 * xs[0] if xs else 0]
    count = [0]

    def rec(idx: int, weight):
        if idx == len(cells):
            count[0] += 1
            if count[0] > cap:
                raise OverflowError(f"more than {cap} tableaux")
            total[0] += weight
            return
        r, c = cells[idx]
        lo = 1
        if c > 0:
            lo = max(lo, filling[(r, c - 1)])
        if r > 0:
            lo = max(lo, filling[(r - 1, c)] + 1)
        for v in range(lo, m + 1):
            filling[(r, c)] = v
            rec(idx + 1, weight * xs[v - 1])
        filling.pop((r, c), None)

    one = Fraction(1) if all(is_exact(x) for x in xs) else 1.0
    if not cells:
        return one
    rec(0, one)
    return total[0]


# ---------------------------------------------------------------------------
# the measures


def cauchy_denominator(mp: ModelParams) -> Scalar:
    q = mp.q
    one = _one(q)
    out = one
    for i in range(mp.n):
        for j in range(mp.k):
            y = q_power(q, j) if mp.spec is Spec.PP else q_power(q, -j)
            out *= q_power(q, i) + y
    return out


def prob(lam: Sequence[int], mp: ModelParams) -> Scalar:
    """Character-ratio probability of lam (product form)."""
    lam = P.check_box(lam, mp.n, mp.k)
    q = mp.q
    num = schur_principal(lam, mp.n, q)
    if mp.spec is Spec.PP:
        num *= dual_schur_principal(lam, mp.n, mp.k, q)
    else:
        num *= dual_schur_principal(lam, mp.n, mp.k, 1 / q)
    return num / _cauchy_denominator_cached(mp)


@lru_cache(maxsize=256)
def _cauchy_denominator_cached(mp: ModelParams) -> Scalar:
    return cauchy_denominator(mp)


def _log_q_dim_factors(coords: np.ndarray, n: int, k: int, log_q: float) -> tuple[float, float, float]:
    """Logs of prod_{i<j}[a_i - a_j], prod_{i<j}[j - i] and the dual factorial product."""
    N = n + k - 1
    lqn = np.concatenate([[-np.inf], log_q_numbers(np.arange(1, N + 2), log_q)])
    lf = log_q_factorials(N + 1, log_q)
    i, j = np.triu_indices(n, 1)
    facts = sum(lf[n + k - l] - lf[coords[l - 1]] - lf[N - coords[l - 1]] for l in range(1, n + 1))
    return float(lqn[coords[i] - coords[j]].sum()), float(lqn[j - i].sum()), float(facts)


def log_prob(lam: Sequence[int], mp: ModelParams) -> float:
    """log of the product-form probability, for float q at large n, k."""
    lam = P.check_box(lam, mp.n, mp.k)
    n, k = mp.n, mp.k
    lq = math.log(float(mp.q))
    a = np.array(P.to_coords(lam, n))
    vdm, hooks, facts = _log_q_dim_factors(a, n, k, lq)
    out = P.content_stat(lam) * lq + vdm - hooks
    if mp.spec is Spec.PP:
        out += P.dual_content_stat(lam, n, k) * lq + vdm + facts
        ys = np.arange(k) * lq
    else:
        vdm_inv, _, facts_inv = _log_q_dim_factors(a, n, k, -lq)
        out += -P.dual_content_stat(lam, n, k) * lq + vdm_inv + facts_inv
        ys = -np.arange(k) * lq
    xs = np.arange(n) * lq
    out -= float(np.logaddexp(xs[:, None], ys[None, :]).sum())
    return float(out)


def weight(a: int, mp: ModelParams) -> Scalar:
    """q-Krawtchouk weight W(a) on the lattice 0..N."""
    if not 0 <= a <= mp.N:
        raise ValueError(f"a={a} outside the lattice 0..{mp.N}")
    e = a * (a - 1) // 2 + a * mp.weight_shift
    return q_power(mp.q, e) * q_binomial(mp.N, a, mp.q)


def log_weights(mp: ModelParams) -> np.ndarray:
    """log W(a) for a = 0..N in floating point."""
    N = mp.N
    lq = math.log(float(mp.q))
    a = np.arange(N + 1)
    lf = log_q_factorials(N, lq)
    return (a * (a - 1) / 2 + a * mp.weight_shift) * lq + lf[N] - lf[a] - lf[N - a]


def vandermonde_sq(coords: Sequence[int], q: Scalar) -> Scalar:
    """prod_{i<j} (q^{-a_i} - q^{-a_j})^2."""
    xs = [q_power(q, -a) for a in coords]
    out = _one(q)
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            out *= (xs[i] - xs[j]) ** 2
    return out


def determinantal_weight(lam: Sequence[int], mp: ModelParams, weight_fn=weight) -> Scalar:
    """Unnormalized determinantal weight of lam; ``weight_fn(a, mp)`` supplies W."""
    if mp.q == 1:
        raise ValueError("the determinantal form degenerates at q = 1")
    coords = P.to_coords(P.check_box(lam, mp.n, mp.k), mp.n)
    out = vandermonde_sq(coords, mp.q)
    for a in coords:
        out *= weight_fn(a, mp)
    return out


@lru_cache(maxsize=256)
def partition_function(mp: ModelParams, cap: int = EXACT_SUMMATION_CAP) -> Scalar:
    """Z = sum over the box of the determinantal weights (exact for rational q)."""
    total = Fraction(0) if mp.exact else 0.0
    for lam in P.enumerate_in_box(mp.n, mp.k, cap=cap):
        total += determinantal_weight(lam, mp)
    return total


def norm_const(mp: ModelParams) -> Scalar:
    """Closed-form candidate for 1/Z, as printed for the two specializations.

    Compare against 1 / partition_function(mp) with :func:`norm_const_ratio`;
    the candidate is not exact in general.
    """
    n, k, q = mp.n, mp.k, mp.q
    if mp.spec is Spec.PP:
        e = k * n * (n + k - 2) // 2
    else:
        e = n * (n - 1) * (n + 2 * k - 2) // 2
    out = q_power(q, e) / cauchy_denominator(mp)
    for i in range(1, n + 1):
        out *= q_factorial(k + i - 1, q) / (q_factorial(i - 1, q) * q_factorial(n + k - 1, q))
    one_minus_q = 1 - q
    return out / one_minus_q ** (n * (n - 1) // 2)


def normalizing_constant(mp: ModelParams) -> Scalar:
    """Exact 1 / Z in closed form (the candidate above times a correction power)."""
    n, k, q = mp.n, mp.k, mp.q
    out = norm_const(mp) / (1 - q) ** (n * (n - 1) // 2)
    if mp.spec is Spec.PIP:
        out /= q_power(q, n * k * (k - 1) // 2 + n * (n - 1) * (2 * k + n - 3) // 2)
    return out


def norm_const_ratio(mp: ModelParams) -> Scalar:
    """(1 / Z) divided by the closed-form candidate; 1 when the candidate is exact."""
    return 1 / (partition_function(mp) * norm_const(mp))


def prob_determinantal(lam: Sequence[int], mp: ModelParams, cap: int = EXACT_SUMMATION_CAP) -> Scalar:
    """Determinantal-form probability with Z obtained by summation over the box."""
    w = determinantal_weight(lam, mp)
    if P.count_in_box(mp.n, mp.k) <= cap:
        return w / partition_function(mp, cap)
    warnings.warn(
        f"{mp.n}x{mp.k} box too large for exact summation; using the closed-form constant",
        RuntimeWarning,
        stacklevel=2,
    )
    return w * norm_const(mp)


@lru_cache(maxsize=64)
def distribution(mp: ModelParams, form: str = "product", cap: int = P.DEFAULT_ENUMERATION_CAP) -> dict:
    """Map partition -> probability over the whole box (enumeration order)."""
    f = prob if form == "product" else prob_determinantal
    return {lam: f(lam, mp) for lam in P.enumerate_in_box(mp.n, mp.k, cap=cap)}


def one_point_marginals(mp: ModelParams) -> list:
    """P(a is occupied) for a = 0..N by exact enumeration."""
    out = [Fraction(0) if mp.exact else 0.0 for _ in range(mp.N + 1)]
    for lam, pr in distribution(mp).items():
        for a in P.to_coords(lam, mp.n):
            out[a] += pr
    return out
