"""q-numbers, q-factorials, q-binomials and q-Pochhammer symbols.

Every function works on two kinds of scalar:

* exact: ``int`` or :class:`fractions.Fraction`, results are exact rationals;
* floating: ``float``, results are floats evaluated with ``expm1``/``log1p``
  so that ``q`` close to 1 does not lose digits.

For float runs where the values themselves leave the double range the
``log_*`` variants return the natural log of the (positive) magnitude.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

Scalar = Union[int, Fraction, float]

# |exponent * ln q| beyond which q**exponent is evaluated through exp/log
LOG_SPACE_THRESHOLD = 500.0


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def as_scalar(q) -> Scalar:
    """Normalise user input: ints and rational strings become Fractions."""
    if isinstance(q, str):
        q = q.strip()
        if any(ch in q for ch in ".eE") and "/" not in q:
            return float(q)
        return Fraction(q)
    if isinstance(q, int) and not isinstance(q, bool):
        return Fraction(q)
    if isinstance(q, (Fraction, float)):
        return q
    if isinstance(q, np.floating):
        return float(q)
    raise TypeError(f"unsupported scalar {q!r}")


def q_power(q: Scalar, e) -> Scalar:
    """q**e; for floats with a large exponent the power goes through exp(e ln q)."""
    if is_exact(q):
        return Fraction(q) ** e
    lq = math.log(q)
    if abs(e * lq) > LOG_SPACE_THRESHOLD:
        return math.exp(e * lq)
    return q ** e


def one_minus_q_power(q: Scalar, e) -> Scalar:
    """1 - q**e without cancellation for float q near 1."""
    if is_exact(q):
        return 1 - Fraction(q) ** e
    return -math.expm1(e * math.log(q))


def q_number(m: int, q: Scalar) -> Scalar:
    """[m]_q = (1 - q^m) / (1 - q), equal to m at q = 1."""
    if is_exact(q):
        return _q_number_exact(m, Fraction(q))
    if q == 1.0:
        return float(m)
    lq = math.log(q)
    return math.expm1(m * lq) / math.expm1(lq)


@lru_cache(maxsize=65536)
def _q_number_exact(m: int, q: Fraction) -> Fraction:
    if q == 1:
        return Fraction(m)
    return (1 - q ** m) / (1 - q)


def q_factorial(m: int, q: Scalar) -> Scalar:
    """[m]_q! = [1]_q [2]_q ... [m]_q."""
    if m < 0:
        raise ValueError("q_factorial needs m >= 0")
    if is_exact(q):
        return _q_factorial_exact(m, Fraction(q))
    out = 1.0
    for i in range(1, m + 1):
        out *= q_number(i, q)
    return out


@lru_cache(maxsize=65536)
def _q_factorial_exact(m: int, q: Fraction) -> Fraction:
    if m == 0:
        return Fraction(1)
    return _q_factorial_exact(m - 1, q) * _q_number_exact(m, q)


def q_binomial(n: int, m: int, q: Scalar) -> Scalar:
    """Gaussian binomial coefficient; zero outside 0 <= m <= n."""
    if m < 0 or m > n or n < 0:
        return Fraction(0) if is_exact(q) else 0.0
    m = min(m, n - m)
    if is_exact(q):
        q = Fraction(q)
        val = _q_factorial_exact(n, q) / (_q_factorial_exact(m, q) * _q_factorial_exact(n - m, q))
        # a Gaussian binomial is a polynomial in q with integer coefficients
        assert q.denominator != 1 or val.denominator == 1
        return val
    out = 1.0
    for i in range(1, m + 1):
        out *= q_number(n - m + i, q) / q_number(i, q)
    return out


def gaussian_coefficients(n: int, m: int) -> list[int]:
    """Integer coefficients c_j of [n choose m]_q = sum_j c_j q^j (Pascal recursion)."""
    if m < 0 or m > n:
        return [0]
    # rows[j] holds the polynomial for [i choose j]
    rows = [[1]]
    for i in range(1, n + 1):
        new = []
        for j in range(0, min(i, m) + 1):
            left = rows[j - 1] if j >= 1 else [0]
            right = rows[j] if j < len(rows) and j <= i - 1 else [0]
            shifted = [0] * j + right
            size = max(len(left), len(shifted))
            poly = [0] * size
            for d, c in enumerate(left):
                poly[d] += c
            for d, c in enumerate(shifted):
                poly[d] += c
            new.append(poly)
        rows = new
    return rows[m]


def q_pochhammer(a: Scalar, q: Scalar, m: int) -> Scalar:
    """(a; q)_m = prod_{i=1}^m (1 - a q^{i-1}); (a; q)_0 = 1."""
    if m < 0:
        raise ValueError("q_pochhammer needs m >= 0")
    exact = is_exact(a) and is_exact(q)
    out = Fraction(1) if exact else 1.0
    term = Fraction(a) if exact else float(a)
    for _ in range(m):
        out *= 1 - term
        term *= q
    return out


# ---------------------------------------------------------------------------
# log-magnitude variants (float only)


def log_q_number(m: int, q: float) -> float:
    """log [m]_q for m >= 1 and q > 0."""
    if m < 1:
        raise ValueError("log_q_number needs m >= 1")
    q = float(q)
    if q == 1.0:
        return math.log(m)
    lq = math.log(q)
    if lq < 0:
        return math.log(-math.expm1(m * lq)) - math.log(-math.expm1(lq))
    # [m]_q = q^{m-1} [m]_{1/q}
    return (m - 1) * lq + math.log(-math.expm1(-m * lq)) - math.log(-math.expm1(-lq))


def log_q_numbers(ms: np.ndarray, log_q: float) -> np.ndarray:
    """Vectorised log [m]_q for an integer array ms >= 1 given ln q."""
    ms = np.asarray(ms, dtype=float)
    if log_q == 0.0:
        return np.log(ms)
    if log_q < 0:
        return np.log(-np.expm1(ms * log_q)) - math.log(-math.expm1(log_q))
    return (ms - 1) * log_q + np.log(-np.expm1(-ms * log_q)) - math.log(-math.expm1(-log_q))


def log_q_factorials(m_max: int, log_q: float) -> np.ndarray:
    """Array of log [m]_q! for m = 0..m_max."""
    out = np.zeros(m_max + 1)
    if m_max >= 1:
        out[1:] = np.cumsum(log_q_numbers(np.arange(1, m_max + 1), log_q))
    return out


def log_q_factorial(m: int, q: float) -> float:
    return float(log_q_factorials(m, math.log(float(q)))[m])


def log_q_binomial(n: int, m: int, q: float) -> float:
    if m < 0 or m > n:
        return -math.inf
    lf = log_q_factorials(n, math.log(float(q)))
    return float(lf[n] - lf[m] - lf[n - m])
