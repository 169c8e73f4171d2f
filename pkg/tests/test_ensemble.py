import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qkrawtchouk import partitions as P
from qkrawtchouk.ensemble import (
    KernelMatrix,
    QKParams,
    build_operator,
    cd_kernel,
    coeff_A,
    coeff_B,
    coeff_C,
    difference_eigenvalues,
    gram_matrix,
    jacobi_coefficients,
    monic_from_hypergeometric,
    monic_values,
    offdiag_squared,
    spectral_kernel,
    verify_difference_eq,
)
from qkrawtchouk.measures import ModelParams, Spec, distribution, one_point_marginals, weight

from conftest import Q_GRID

exact_models = st.builds(
    ModelParams,
    n=st.integers(1, 4),
    k=st.integers(1, 4),
    q=st.sampled_from(Q_GRID + [Fraction(4, 5)]),
    spec=st.sampled_from(list(Spec)),
)


@given(exact_models, st.data())
def test_difference_equation_exact(mp, data):
    qk = QKParams.from_model(mp)
    if mp.N < 2:
        return
    m = data.draw(st.integers(0, mp.N))
    a = data.draw(st.integers(1, mp.N - 1))
    assert verify_difference_eq(m, a, qk) == 0


@given(exact_models, st.data())
def test_monic_recurrence_matches_hypergeometric_series(mp, data):
    qk = QKParams.from_model(mp)
    m = data.draw(st.integers(0, mp.N))
    x = data.draw(st.integers(0, mp.N))
    assert monic_values(m, qk.q ** (-x), qk)[m] == monic_from_hypergeometric(m, x, qk)


@given(exact_models)
def test_symmetrization_identity_exact(mp):
    # B(a) W(a) = C(a+1) W(a+1), and the symmetric coupling squares to B(a) C(a+1)
    qk = QKParams.from_model(mp)
    for a in range(mp.N):
        B, C1 = coeff_B(a, qk), coeff_C(a + 1, qk)
        assert B * weight(a, mp) == C1 * weight(a + 1, mp)
        assert offdiag_squared(a, qk) == B * C1
        assert offdiag_squared(a, qk) == B**2 * weight(a, mp) / weight(a + 1, mp)


@pytest.mark.parametrize("q", [0.5, 0.8, 1.5])
@pytest.mark.parametrize("n,k", [(1, 1), (2, 3), (4, 4), (3, 1)])
def test_kernel_diagonal_equals_marginals(n, k, q, spec):
    mp_exact = ModelParams(n, k, Fraction(q), spec)
    marg = np.array([float(x) for x in one_point_marginals(mp_exact)])
    K = spectral_kernel(ModelParams(n, k, q, spec))
    assert np.max(np.abs(K.diagonal() - marg)) < 1e-10
    assert np.max(np.abs(cd_kernel(ModelParams(n, k, q, spec)).entries - K.entries)) < 1e-10


def test_two_point_correlation_is_a_determinant(spec):
    mp = ModelParams(3, 3, Fraction(1, 2), spec)
    K = spectral_kernel(ModelParams(3, 3, 0.5, spec))
    dist = distribution(mp)
    for a, b in itertools.combinations(range(mp.N + 1), 2):
        exact = sum(p for lam, p in dist.items() if {a, b} <= set(P.to_coords(lam, 3)))
        assert K.correlation([a, b]) == pytest.approx(float(exact), abs=1e-12)


@pytest.mark.parametrize("q", [0.6, 0.9, 1.1, 1.7])
def test_kernel_is_rank_n_projection(q, spec):
    K = spectral_kernel(ModelParams(5, 7, q, spec)).entries
    assert np.allclose(K @ K, K, atol=1e-12)
    assert np.trace(K) == pytest.approx(5, abs=1e-12)
    assert np.allclose(K, K.T)


@pytest.mark.parametrize("n,k", [(3, 5), (10, 10), (20, 20), (15, 4)])
@pytest.mark.parametrize("q", [0.7, 0.95, 1.05, 1.4])
def test_operator_spectrum_is_difference_eigenvalues(n, k, q, spec):
    mp = ModelParams(n, k, q, spec)
    T = build_operator(mp)
    A = difference_eigenvalues(mp)
    w = np.linalg.eigvalsh(T.dense())
    assert np.max(np.abs(np.sort(w) - np.sort(A))) <= 1e-8 * max(1.0, np.max(np.abs(A)))
    assert spectral_kernel(mp).eigen_mismatch <= 1e-8


def test_difference_eigenvalues_exact_values():
    # p = q^{-3} = 8, A(m) = q^{-m} (1 - q^m)(1 + p q^m) by hand
    mp = ModelParams(2, 2, Fraction(1, 2))
    qk = QKParams.from_model(mp)
    assert [coeff_A(m, qk) for m in range(4)] == [0, 5, 9, 14]
    assert np.allclose(difference_eigenvalues(ModelParams(2, 2, 0.5)), [0, 5, 9, 14])


@pytest.mark.parametrize("q", [0.5, 0.9, 1.2])
def test_jacobi_matrix_eigenvalues_are_lattice_nodes(q, spec):
    mp = ModelParams(3, 4, q, spec)
    a, b = jacobi_coefficients(QKParams.from_model(mp))
    J = np.diag(b) + np.diag(a, 1) + np.diag(a, -1)
    nodes = np.sort(q ** -np.arange(mp.N + 1))
    assert np.linalg.eigvalsh(J) == pytest.approx(nodes, rel=1e-10)


@pytest.mark.parametrize("q", [0.8, 1.25])
def test_gram_matrix_small_double_precision(q, spec):
    G = gram_matrix(ModelParams(3, 3, q, spec))
    assert np.max(np.abs(G - np.eye(G.shape[0]))) < 1e-11


def test_matvec_matches_dense():
    T = build_operator(ModelParams(3, 4, 0.7))
    v = np.arange(T.size, dtype=float)
    assert np.allclose(T.matvec(v), T.dense() @ v)


def test_kernel_from_matrix_roundtrip():
    K = spectral_kernel(ModelParams(3, 4, 0.6))
    again = KernelMatrix.from_matrix(K.entries)
    assert again.rank == 3 and np.allclose(again.entries, K.entries)
    with pytest.raises(ValueError):
        KernelMatrix.from_matrix(np.eye(3) * 0.5)


def test_size_budget_and_degenerate_q():
    with pytest.raises(ValueError):
        spectral_kernel(ModelParams(10, 10, 0.9), max_dim=5)
    with pytest.raises(ValueError):
        spectral_kernel(ModelParams(2, 2, 1.0))
