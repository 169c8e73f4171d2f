"""q-Krawtchouk polynomials and the correlation kernel of the ensemble.

The kernel is built from the symmetric tridiagonal operator whose
eigenvectors are kappa_m(a) = sqrt(W(a)) K_m(a); its eigenvalues are the
q-difference eigenvalues A(m).  A direct Christoffel-Darboux sum over
recurrence-built orthonormal polynomials is kept as an independent route for
small lattices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal
from scipy.special import logsumexp

from .measures import ModelParams, Spec, log_weights
from .qmath import Scalar, is_exact, one_minus_q_power, q_pochhammer, q_power

DENSE_EIGEN_BUDGET = 5000
EIGEN_MATCH_TOL = 1e-8


class EigenMatchError(RuntimeError):
    pass


@dataclass(frozen=True)
class QKParams:
    """Parameters (p, N, q) of the q-Krawtchouk family."""

    p: Scalar
    N: int
    q: Scalar

    @classmethod
    def from_model(cls, mp: ModelParams) -> "QKParams":
        n, k, q = mp.n, mp.k, mp.q
        e = 1 - 2 * n if mp.spec is Spec.PP else 2 - 2 * n - k
        return cls(p=q_power(q, e), N=n + k - 1, q=q)

    @property
    def exact(self) -> bool:
        return is_exact(self.q) and is_exact(self.p)


def _qpow(qk: QKParams, e):
    return q_power(qk.q, e)


def _1mq(qk: QKParams, e):
    return one_minus_q_power(qk.q, e)


# ---------------------------------------------------------------------------
# q-difference equation coefficients


def coeff_A(m: int, qk: QKParams) -> Scalar:
    """Eigenvalue A(m) = q^{-m} (1 - q^m)(1 + p q^m)."""
    return _qpow(qk, -m) * _1mq(qk, m) * (1 + qk.p * _qpow(qk, m))


def coeff_B(a: int, qk: QKParams) -> Scalar:
    return _1mq(qk, a - qk.N)


def coeff_C(a: int, qk: QKParams) -> Scalar:
    return -qk.p * _1mq(qk, a)


def difference_eigenvalues(mp: ModelParams) -> np.ndarray:
    """A(m) for m = 0..N as floats, evaluated stably in log space."""
    lq = mp.log_q
    lp = _log_p(mp)
    m = np.arange(mp.N + 1)
    # q^{-m}(1 - q^m) = q^{-m} - 1
    return np.expm1(-m * lq) * (1.0 + np.exp(lp + m * lq))


def _log_p(mp: ModelParams) -> float:
    e = 1 - 2 * mp.n if mp.spec is Spec.PP else 2 - 2 * mp.n - mp.k
    return e * mp.log_q


# ---------------------------------------------------------------------------
# three-term recurrences


def monic_recurrence_coeffs(m: int, qk: QKParams) -> tuple[Scalar, Scalar]:
    """(A_m, C_m) of the monic recurrence in the variable q^{-x}.

    x P_m = P_{m+1} + (1 - A_m - C_m) P_m + A_{m-1} C_m P_{m-1}.
    """
    p, N = qk.p, qk.N
    pq = lambda e: p * _qpow(qk, e)
    A = _1mq(qk, m - N) * (1 + pq(m)) / ((1 + pq(2 * m)) * (1 + pq(2 * m + 1)))
    C = -pq(2 * m - N - 1) * (1 + pq(m + N)) * _1mq(qk, m) / ((1 + pq(2 * m - 1)) * (1 + pq(2 * m)))
    return A, C


def monic_alpha_beta(m: int, qk: QKParams) -> tuple[Scalar, Scalar]:
    A, C = monic_recurrence_coeffs(m, qk)
    beta = monic_recurrence_coeffs(m - 1, qk)[0] * C if m >= 1 else 0 * C
    return 1 - (A + C), beta


def normalized_recurrence_coeffs(m: int, qk: QKParams) -> tuple[float, float]:
    """(a_m, b_m) of the orthonormal recurrence, 1 <= m <= N + 1.

    a_m = sqrt(A_{m-1} C_m) and b_m = 1 - A_{m-1} - C_{m-1}.
    """
    if not 1 <= m <= qk.N + 1:
        raise ValueError(f"m={m} outside 1..{qk.N + 1}")
    A_prev, C_prev = monic_recurrence_coeffs(m - 1, qk)
    _, C_m = monic_recurrence_coeffs(m, qk)
    radicand = A_prev * C_m
    if radicand < 0:
        raise ValueError(f"negative radicand {float(radicand)!r} at m={m}; check the parameter map")
    return math.sqrt(radicand), float(1 - A_prev - C_prev)


def jacobi_coefficients(qk: QKParams) -> tuple[np.ndarray, np.ndarray]:
    """Arrays b_1..b_{N+1} and a_1..a_N of the orthonormal recurrence."""
    N = qk.N
    b = np.empty(N + 1)
    a = np.empty(N)
    for m in range(1, N + 2):
        am, bm = normalized_recurrence_coeffs(m, qk)
        b[m - 1] = bm
        if m <= N:
            a[m - 1] = am
    return a, b


def monic_values(m_max: int, x: Scalar, qk: QKParams) -> list:
    """P_0(x), ..., P_{m_max}(x) of the monic family by forward recurrence."""
    vals = [x ** 0 if is_exact(x) else 1.0]
    if m_max == 0:
        return vals
    alpha0, _ = monic_alpha_beta(0, qk)
    vals.append(x - alpha0)
    for m in range(1, m_max):
        alpha, beta = monic_alpha_beta(m, qk)
        vals.append((x - alpha) * vals[m] - beta * vals[m - 1])
    return vals


def qkrawtchouk_hypergeometric(m: int, x: int, qk: QKParams) -> Scalar:
    """K_m(q^{-x}; p, N; q) from its terminating 3phi2 series."""
    q, p, N = qk.q, qk.p, qk.N
    total = 0 * q
    for j in range(0, min(m, x, N) + 1):
        num = q_pochhammer(_qpow(qk, -m), q, j) * q_pochhammer(_qpow(qk, -x), q, j)
        num *= q_pochhammer(-p * _qpow(qk, m), q, j)
        den = q_pochhammer(_qpow(qk, -N), q, j) * q_pochhammer(q, q, j)
        total += num / den * _qpow(qk, j)
    return total


def monic_from_hypergeometric(m: int, x: int, qk: QKParams) -> Scalar:
    """P_m(q^{-x}) = (q^{-N}; q)_m / (-p q^m; q)_m * K_m(q^{-x})."""
    q = qk.q
    scale = q_pochhammer(_qpow(qk, -qk.N), q, m) / q_pochhammer(-qk.p * _qpow(qk, m), q, m)
    return scale * qkrawtchouk_hypergeometric(m, x, qk)


def verify_difference_eq(m: int, a: int, qk: QKParams) -> Scalar:
    """Scaled residual of the q-difference equation for the degree-m polynomial at a.

    Exactly zero in rational arithmetic; the float value is relative to the
    size of the individual terms.
    """
    if not 1 <= a <= qk.N - 1:
        raise ValueError("a must be an interior lattice point")
    P = [monic_values(m, _qpow(qk, -x), qk)[m] for x in (a - 1, a, a + 1)]
    A, B, C = coeff_A(m, qk), coeff_B(a, qk), coeff_C(a, qk)
    terms = [A * P[1], -B * P[2], (B + C) * P[1], -C * P[0]]
    res = sum(terms)
    if qk.exact:
        return abs(res)
    scale = sum(abs(t) for t in terms) or 1.0
    return abs(res) / scale


# ---------------------------------------------------------------------------
# symmetric tridiagonal operator


@dataclass(frozen=True)
class TridiagonalOperator:
    diag: np.ndarray
    offdiag: np.ndarray

    @property
    def size(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out


def offdiag_squared(a: int, qk: QKParams) -> Scalar:
    """p q^{a-N} (1 - q^{a+1})(1 - q^{N-a}), the square of the symmetrized coupling of a and a + 1."""
    return qk.p * _qpow(qk, a - qk.N) * _1mq(qk, a + 1) * _1mq(qk, qk.N - a)


def build_operator(mp: ModelParams) -> TridiagonalOperator:
    """Operator with eigenvectors sqrt(W) K_m and eigenvalues A(m).

    diag[a]    = -(B(a) + C(a))
    offdiag[a] = B(a) sqrt(W(a)/W(a+1)) = sign(B(a)) sqrt(p q^{a-N} (1-q^{a+1})(1-q^{N-a}))
    """
    N = mp.N
    lq = mp.log_q
    lp = _log_p(mp)
    a = np.arange(N + 1)
    B = -np.expm1((a - N) * lq)
    C = np.exp(lp) * np.expm1(a * lq)
    diag = -(B + C)
    aa = a[:-1]
    f1 = -np.expm1((aa + 1) * lq)
    f2 = -np.expm1((N - aa) * lq)
    radicand_sign = np.sign(f1 * f2)
    if np.any(radicand_sign <= 0):
        raise ValueError("non-positive radicand in the off-diagonal entries")
    log_mag = 0.5 * (lp + (aa - N) * lq + np.log(np.abs(f1)) + np.log(np.abs(f2)))
    offdiag = np.sign(B[:-1]) * np.exp(log_mag)
    return TridiagonalOperator(diag=diag, offdiag=offdiag)


# ---------------------------------------------------------------------------
# kernels


@dataclass
class KernelMatrix:
    """Rank-n projection kernel on the lattice 0..N, stored through an orthonormal basis.

    ``basis`` has shape (N+1, n); the kernel is basis @ basis.T.
    """

    basis: np.ndarray
    params: ModelParams | None = None
    eigen_mismatch: float = field(default=float("nan"))

    @classmethod
    def from_matrix(cls, K: np.ndarray, params: ModelParams | None = None, tol: float = 1e-6) -> "KernelMatrix":
        K = 0.5 * (np.asarray(K, dtype=float) + np.asarray(K, dtype=float).T)
        w, V = np.linalg.eigh(K)
        keep = w > 0.5
        if np.any(np.abs(w[keep] - 1) > tol) or np.any(np.abs(w[~keep]) > tol):
            raise ValueError("matrix is not an orthogonal projection")
        return cls(basis=V[:, keep], params=params)

    @property
    def size(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @cached_property
    def entries(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def diagonal(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.basis, self.basis)

    def trace(self) -> float:
        return float(self.diagonal().sum())

    def __getitem__(self, idx):
        a, b = idx
        return float(self.basis[a] @ self.basis[b])

    def correlation(self, points) -> float:
        """det[K(x_i, x_j)], the correlation function at distinct lattice points."""
        pts = list(points)
        sub = self.basis[pts] @ self.basis[pts].T
        return float(np.linalg.det(sub)) if pts else 1.0


def spectral_kernel(mp: ModelParams, max_dim: int = DENSE_EIGEN_BUDGET, check_all: bool = True) -> KernelMatrix:
    """Projection onto the eigenvectors of the first n eigenvalues A(0..n-1)."""
    size = mp.N + 1
    if size > max_dim:
        raise ValueError(f"lattice size {size} exceeds the eigensolver budget {max_dim}")
    if mp.q == 1:
        raise ValueError("q = 1 is degenerate for the q-Krawtchouk operator")
    T = build_operator(mp)
    A = difference_eigenvalues(mp)
    n = mp.n
    order = np.argsort(A)
    A_sorted = A[order]
    scale = max(1.0, float(np.max(np.abs(A))))
    targets = set(range(n))
    idx = np.array(sorted(i for i, m in enumerate(order) if m in targets))
    if idx.size != n or idx[-1] - idx[0] != n - 1:
        raise EigenMatchError("target eigenvalues do not form a contiguous block")
    gaps = np.diff(A_sorted)
    if gaps.size and gaps.min() < 1e3 * np.finfo(float).eps * scale:
        raise EigenMatchError(f"near-degenerate spectrum (min gap {gaps.min():.3e})")
    if size == 1:
        return KernelMatrix(basis=np.ones((1, 1)), params=mp, eigen_mismatch=0.0)
    if check_all:
        w_all = eigvalsh_tridiagonal(T.diag, T.offdiag)
        mismatch = float(np.max(np.abs(np.sort(w_all) - A_sorted)) / scale)
    w, V = eigh_tridiagonal(
        T.diag, T.offdiag, select="i", select_range=(int(idx[0]), int(idx[-1])), lapack_driver="stemr"
    )
    block_mismatch = float(np.max(np.abs(w - A_sorted[idx])) / scale)
    if not check_all:
        mismatch = block_mismatch
    mismatch = max(mismatch, block_mismatch)
    if mismatch > EIGEN_MATCH_TOL:
        raise EigenMatchError(
            f"eigenvalues deviate from A(m) by {mismatch:.3e} (relative to {scale:.3e}) for {mp}"
        )
    return KernelMatrix(basis=V, params=mp, eigen_mismatch=mismatch)


def orthonormal_functions(mp: ModelParams, m_max: int | None = None, digits: int | None = None) -> np.ndarray:
    """kappa_m(a) = sqrt(W(a)) p_m(q^{-a}) for m = 0..m_max from the orthonormal recurrence.

    Row m holds kappa_m on the lattice.  The forward recurrence loses
    accuracy at high degree where kappa_m is exponentially small; pass
    ``digits`` to run it in multiprecision (coefficients and weights are then
    formed exactly from the rational value of q before the square roots).
    """
    N = mp.N
    if m_max is None:
        m_max = N
    if digits is not None:
        return _orthonormal_functions_mp(mp, m_max, digits)
    qk = QKParams.from_model(ModelParams(mp.n, mp.k, float(mp.q), mp.spec))
    a_coef, b_coef = jacobi_coefficients(qk)
    lw = log_weights(mp)
    x = np.exp(-np.arange(N + 1) * mp.log_q)
    out = np.empty((m_max + 1, N + 1))
    out[0] = np.exp(0.5 * (lw - logsumexp(lw)))
    if m_max >= 1:
        out[1] = (x - b_coef[0]) * out[0] / a_coef[0]
    for m in range(1, m_max):
        out[m + 1] = ((x - b_coef[m]) * out[m] - a_coef[m - 1] * out[m - 1]) / a_coef[m]
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("overflow while evaluating the orthonormal polynomials")
    return out


def _orthonormal_functions_mp(mp: ModelParams, m_max: int, digits: int) -> np.ndarray:
    import mpmath

    from .measures import weight

    q = Fraction(mp.q)
    exact_mp = ModelParams(mp.n, mp.k, q, mp.spec)
    qk = QKParams.from_model(exact_mp)
    N = mp.N
    to_mp = lambda fr: mpmath.mpf(fr.numerator) / fr.denominator
    with mpmath.workdps(digits):
        a_coef, b_coef = [], []
        for m in range(1, m_max + 1):
            A_prev, C_prev = monic_recurrence_coeffs(m - 1, qk)
            _, C_m = monic_recurrence_coeffs(m, qk)
            a_coef.append(mpmath.sqrt(to_mp(A_prev * C_m)))
            b_coef.append(to_mp(1 - A_prev - C_prev))
        W = [weight(a, exact_mp) for a in range(N + 1)]
        Z = sum(W)
        x = [to_mp(q ** (-a)) for a in range(N + 1)]
        rows = [[mpmath.sqrt(to_mp(w / Z)) for w in W]]
        if m_max >= 1:
            rows.append([(x[i] - b_coef[0]) * rows[0][i] / a_coef[0] for i in range(N + 1)])
        for m in range(1, m_max):
            rows.append(
                [((x[i] - b_coef[m]) * rows[m][i] - a_coef[m - 1] * rows[m - 1][i]) / a_coef[m] for i in range(N + 1)]
            )
        return np.array([[float(v) for v in row] for row in rows])


def cd_kernel(mp: ModelParams) -> KernelMatrix:
    """Christoffel-Darboux sum of the first n orthonormal functions (small lattices only)."""
    kappa = orthonormal_functions(mp, mp.n - 1)
    return KernelMatrix(basis=kappa.T.copy(), params=mp)


def gram_matrix(mp: ModelParams, m_max: int | None = None, digits: int | None = None) -> np.ndarray:
    """Gram matrix sum_a W(a) p_j(a) p_l(a) of the recurrence-built orthonormal polynomials."""
    kappa = orthonormal_functions(mp, m_max, digits)
    return kappa @ kappa.T
