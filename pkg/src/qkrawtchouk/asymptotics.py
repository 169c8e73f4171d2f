"""Large-n limit objects in the regime q = exp(-gamma / n), k / n -> c.

Positions are rescaled as t = a / n in [0, c + 1].  The orthogonal
polynomials live in the variable s = q^{-a} = exp(gamma t), so supports and
Fourier data below are expressed in s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .ensemble import QKParams, normalized_recurrence_coeffs
from .measures import Spec

CLAMP_WINDOW = 1e-12
SIMPSON_TOL = 1e-9
FOURIER_NODES = 1 << 12
TAIL_TOL = 1e-10
RICHARDSON_LADDER = (200, 400, 800)
RICHARDSON_TOL = 1e-6
RICHARDSON_MAX_N = 200 * 2**12
SUPPORT_TOL = 1e-6


@dataclass(frozen=True)
class LimitParams:
    gamma: float
    c: float
    spec: Spec = Spec.PP

    def __post_init__(self):
        if self.gamma == 0 or not math.isfinite(self.gamma):
            raise ValueError("gamma must be finite and nonzero")
        if not self.c > 0:
            raise ValueError("c must be positive")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "spec", Spec(self.spec))

    @property
    def length(self) -> float:
        """Right end c + 1 of the rescaled lattice."""
        return self.c + 1.0

    @property
    def log_P(self) -> float:
        """Limit of log(p q^m) at m = 0 after rescaling: 2 gamma (PP) or gamma (2 + c) (PIP)."""
        g = self.gamma
        return 2 * g if self.spec is Spec.PP else g * (2 + self.c)

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "c": self.c, "spec": self.spec.value}


@dataclass(frozen=True)
class SupportInterval:
    lo: float
    hi: float
    t_lo: float
    t_hi: float

    @property
    def a(self) -> float:
        return (self.hi - self.lo) / 4

    @property
    def b(self) -> float:
        return (self.hi + self.lo) / 2


# ---------------------------------------------------------------------------
# density


def _numerator(t: np.ndarray, lp: LimitParams) -> np.ndarray:
    """Signed numerator of the arccos argument, prefactors included."""
    g, c = lp.gamma, lp.c
    sign = -np.sign(g)
    if lp.spec is Spec.PP:
        return sign * np.exp(g - g * t / 2) / 2 * -np.expm1(g * (c - 1))
    core = -np.expm1(g * c) + np.exp(g * (c - t)) * np.expm1(g)
    return sign * np.exp(g * (t - c) / 2) / 2 * core


def _radicand(t: np.ndarray, lp: LimitParams) -> np.ndarray:
    g = lp.gamma
    return np.expm1(g * t) * np.expm1(g * (lp.length - t))


def arccos_argument(t, lp: LimitParams) -> np.ndarray:
    """Argument whose arccos is the local arc angle; defined for t in (0, c + 1)."""
    t = np.asarray(t, dtype=float)
    rad = _radicand(t, lp)
    if np.any(~(rad > 0)):
        raise ValueError("t must lie strictly inside (0, c + 1)")
    return _numerator(t, lp) / np.sqrt(rad)


def arc_angle(t, lp: LimitParams, frozen: bool = True) -> np.ndarray:
    """phi in [0, pi].

    Inside the band this is arccos of :func:`arccos_argument`.  Outside it,
    ``frozen=True`` continues to 0 (argument > 1) or pi (argument < -1);
    otherwise a ValueError is raised beyond the clamping window.
    """
    x = arccos_argument(t, lp)
    if not frozen and np.any(np.abs(x) > 1 + CLAMP_WINDOW):
        raise ValueError("t lies outside the band")
    return np.arccos(np.clip(x, -1.0, 1.0))


def limit_density(t, lp: LimitParams) -> np.ndarray:
    """rho(t) on [0, c + 1], with frozen values 0 / 1 outside the band.

    At t = 0 and t = c + 1 the argument diverges (or vanishes identically);
    the frozen value follows the sign of the numerator there.
    """
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > lp.length)):
        raise ValueError("t outside [0, c + 1]")
    out = np.empty_like(t)
    inner = (t > 0) & (t < lp.length)
    out[inner] = arc_angle(t[inner], lp) / np.pi
    edge = ~inner
    if np.any(edge):
        num = _numerator(t[edge], lp)
        out[edge] = np.where(num > 0, 0.0, np.where(num < 0, 1.0, 0.5))
    return out if out.ndim else float(out)


def _adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float, depth: int = 48) -> float:
    def simpson(fa, fm, fb, h):
        return h / 6 * (fa + 4 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = (a + b) / 2
        lm, rm = (a + m) / 2, (m + b) / 2
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15 * tol:
            return left + right + delta / 15
        return rec(a, m, fa, flm, fm, left, tol / 2, depth - 1) + rec(m, b, fm, frm, fb, right, tol / 2, depth - 1)

    if b == a:
        return 0.0
    fa, fb, fm = f(a), f(b), f((a + b) / 2)
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, depth)


def _band(lp: LimitParams) -> tuple[float, float]:
    """Band edges in t, found independently of the recurrence coefficients."""
    L = lp.length
    grid = np.linspace(0, L, 4097)[1:-1]
    x = arccos_argument(grid, lp)
    i = int(np.argmin(np.abs(x)))
    t0 = float(grid[i])
    if abs(x[i]) > 1:
        raise RuntimeError("no band found")

    def edge(end: float) -> float:
        # walk towards the endpoint until the argument leaves [-1, 1]
        for j in range(1, 64):
            t = end + (t0 - end) * 2.0**-j
            if not _radicand(t, lp) > 0:
                break
            v = float(arccos_argument(t, lp))
            if abs(v) > 1:
                s = math.copysign(1.0, v)
                return brentq(lambda u: float(arccos_argument(u, lp)) - s, min(t, t0), max(t, t0), xtol=1e-15, rtol=1e-15)
        return end

    lo, hi = edge(0.0), edge(L)
    return lo, hi


def limit_shape(x, lp: LimitParams, tol: float = SIMPSON_TOL) -> np.ndarray:
    """f(x) = 1 + int_0^x (1 - 2 rho(t)) dt, piecewise adaptive Simpson split at the band edges."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((xs < 0) | (xs > lp.length)):
        raise ValueError("x outside [0, c + 1]")
    breaks = sorted({0.0, *_band(lp), lp.length})
    integrand = lambda t: 1.0 - 2.0 * float(limit_density(t, lp))
    order = np.argsort(xs)
    out = np.empty_like(xs)
    acc, pos = 1.0, 0.0
    for idx in order:
        target = xs[idx]
        for b in [br for br in breaks if pos < br < target] + [target]:
            acc += _adaptive_simpson(integrand, pos, b, tol)
            pos = b
        out[idx] = acc
    return out if np.ndim(x) else float(out[0])


def total_mass(lp: LimitParams, tol: float = SIMPSON_TOL) -> float:
    """int_0^{c+1} rho(t) dt; equals 1."""
    breaks = sorted({0.0, *_band(lp), lp.length})
    rho = lambda t: float(limit_density(t, lp))
    return sum(_adaptive_simpson(rho, a, b, tol) for a, b in zip(breaks[:-1], breaks[1:]))


def sine_kernel(u, v, phi) -> np.ndarray:
    """sin(phi (u - v)) / (pi (u - v)), equal to phi / pi on the diagonal."""
    d = np.asarray(u, dtype=float) - np.asarray(v, dtype=float)
    phi = np.asarray(phi, dtype=float)
    safe = np.where(d == 0, 1.0, d)
    out = np.where(d == 0, phi / np.pi, np.sin(phi * safe) / (np.pi * safe))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# recurrence coefficients and support


def finite_recurrence(n: int, lp: LimitParams) -> tuple[float, float]:
    """(a_n, b_n) at size n with k = c n taken as a real number."""
    q = math.exp(-lp.gamma / n)
    k = lp.c * n
    e = 1 - 2 * n if lp.spec is Spec.PP else 2 - 2 * n - k
    qk = QKParams(p=math.exp(e * math.log(q)), N=n + k - 1, q=q)
    return normalized_recurrence_coeffs(n, qk)


def _richardson(values: list[np.ndarray]) -> list[np.ndarray]:
    """Diagonal of the Richardson table for errors in powers of 1/n with n doubling."""
    table = [list(values)]
    while len(table[-1]) > 1:
        prev, j = table[-1], len(table)
        table.append([(2**j * prev[i + 1] - prev[i]) / (2**j - 1) for i in range(len(prev) - 1)])
    return [row[-1] for row in table]


def recurrence_limits(lp: LimitParams, tol: float = RICHARDSON_TOL) -> tuple[float, float]:
    """Limits (a, b) of the orthonormal recurrence coefficients at index n.

    Sizes double from 200 until the two highest Richardson orders agree to
    ``tol`` relative to max(1, |value|).
    """
    ns = list(RICHARDSON_LADDER)
    vals = [np.array(finite_recurrence(n, lp)) for n in ns]
    while True:
        diag = _richardson(vals)
        best, prev = diag[-1], diag[-2]
        err = np.abs(best - prev) / np.maximum(1.0, np.abs(best))
        if np.all(err <= tol):
            return float(best[0]), float(best[1])
        if ns[-1] >= RICHARDSON_MAX_N:
            raise ArithmeticError(f"recurrence coefficients did not converge (error {err.max():.2e})")
        ns.append(2 * ns[-1])
        vals.append(np.array(finite_recurrence(ns[-1], lp)))


def closed_form_limits(lp: LimitParams) -> tuple[float, float]:
    """Closed forms of the recurrence limits (a, b)."""
    g, c = lp.gamma, lp.c
    if lp.spec is Spec.PP:
        a = 0.25 * math.sqrt(math.expm1(2 * g) * math.expm1(2 * g * c))
        b = (1 + math.exp(g * (c + 1))) / 2
        return a, b
    E, Ec = math.exp(g), math.exp(g * c)
    a = Ec / (1 + Ec) ** 2 * math.sqrt(2 * math.expm1(g) * math.expm1(g * c) * (1 + E * Ec))
    b = (3 * Ec - Ec**2 - E * Ec + 3 * E * Ec**2) / (1 + Ec) ** 2
    return a, b


def support(lp: LimitParams, tol: float = SUPPORT_TOL) -> SupportInterval:
    """Support [b - 2a, b + 2a] in s = exp(gamma t), cross-checked against the density band."""
    a, b = recurrence_limits(lp)
    t_lo, t_hi = _band(lp)
    s_edges = sorted(math.exp(lp.gamma * t) for t in (t_lo, t_hi))
    lo, hi = b - 2 * a, b + 2 * a
    scale = max(1.0, abs(b) + 2 * a)
    if abs(lo - s_edges[0]) > tol * scale or abs(hi - s_edges[1]) > tol * scale:
        raise ArithmeticError(f"support mismatch: recurrence [{lo}, {hi}] vs density band {s_edges}")
    return SupportInterval(lo=lo, hi=hi, t_lo=t_lo, t_hi=t_hi)


# ---------------------------------------------------------------------------
# fluctuations


def fourier_coeffs(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, l_max: int, nodes: int = FOURIER_NODES) -> np.ndarray:
    """(1/2pi) int_0^{2pi} f(2a cos th + b) e^{-i l th} d th for l = 1..l_max (trapezoid rule)."""
    if l_max >= nodes // 2:
        raise ValueError("l_max must be below nodes / 2")
    theta = 2 * np.pi * np.arange(nodes) / nodes
    vals = np.asarray(f(2 * a * np.cos(theta) + b), dtype=float) * np.ones(nodes)
    return np.fft.fft(vals)[1 : l_max + 1] / nodes


def clt_variance(f: Callable[[np.ndarray], np.ndarray], lp: LimitParams | None = None, ab: tuple[float, float] | None = None) -> float:
    """sum_{l >= 1} l |f_l|^2, truncated once the remaining tail is below 1e-10."""
    a, b = ab if ab is not None else recurrence_limits(lp)
    coeffs = fourier_coeffs(f, a, b, FOURIER_NODES // 2 - 1)
    terms = np.arange(1, coeffs.size + 1) * np.abs(coeffs) ** 2
    tail = np.cumsum(terms[::-1])[::-1]
    stop = int(np.argmax(tail < TAIL_TOL)) if np.any(tail < TAIL_TOL) else terms.size
    return float(terms[:stop].sum())


# ---------------------------------------------------------------------------
# spectrum of the rescaled operator


def band_edge(x, mu, lp: LimitParams) -> np.ndarray:
    """Limit of the symmetrized eigenvalue at eigen-index m = mu n, position a = x n.

    Dividing the eigen-equation by the off-diagonal entry and letting n grow
    gives pref * (A_mu + B + C) / B with
    A_mu = (e^{g mu} - 1)(1 + P e^{-g mu}), B = 1 - e^{g(c+1-x)},
    C = -P (1 - e^{-g x}).
    """
    g, c = lp.gamma, lp.c
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x >= lp.length)):
        raise ValueError("x must lie strictly inside (0, c + 1)")
    P = math.exp(lp.log_P)
    ratio = np.expm1(-g * (c + 1 - x)) / np.expm1(-g * x)
    pref = np.exp(-g * (x - c - 1) / 2 - lp.log_P / 2) * np.sqrt(ratio)
    B = -np.expm1(g * (c + 1 - x))
    C = P * np.expm1(-g * x)
    A = np.expm1(g * np.asarray(mu, dtype=float)) * (1 + P * np.exp(-g * np.asarray(mu, dtype=float)))
    return pref * (A + B + C) / B


@dataclass(frozen=True)
class SpectralBand:
    projection: tuple[float, float]  # eigen-indices m < n
    full: tuple[float, float]  # all eigen-indices m <= N


def spectral_interval(x: float, lp: LimitParams) -> SpectralBand:
    """Intervals swept by the limit eigenvalues at position x (A_mu is monotone in mu)."""
    e0, e1, eN = (float(band_edge(x, mu, lp)) for mu in (0.0, 1.0, lp.length))
    return SpectralBand(projection=(min(e0, e1), max(e0, e1)), full=(min(e0, eN), max(e0, eN)))
