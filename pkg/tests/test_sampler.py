from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qkrawtchouk.ensemble import KernelMatrix, spectral_kernel
from qkrawtchouk.measures import ModelParams, distribution, one_point_marginals
from qkrawtchouk.sampler import (
    SampleBatch,
    chi_square_test,
    dpp_linear_variance,
    empirical_density,
    linear_statistic,
    random_words,
    sample_dpp,
    sample_exact,
    uniforms,
)


def kernel(n, k, q, spec="pp"):
    return spectral_kernel(ModelParams(n, k, float(q), spec))


@given(st.integers(0, 2**64 - 1), st.integers(0, 50), st.integers(1, 20), st.integers(1, 9))
def test_substreams_depend_only_on_draw_index(seed, start, count, width):
    whole = random_words(seed, 0, start + count, width)
    assert np.array_equal(random_words(seed, start, count, width), whole[start:])


def test_uniforms_in_unit_interval():
    u = uniforms(3, 0, 1000, 4)
    assert u.min() >= 0 and u.max() < 1


def check_batch(batch: SampleBatch):
    n, N = batch.params.n, batch.params.N
    s = batch.samples
    assert s.shape[1] == n
    assert np.all(np.diff(s, axis=1) < 0)
    assert s.min() >= 0 and s.max() <= N


def test_single_cell_exact_sampler_is_fair():
    batch = sample_exact(ModelParams(1, 1, Fraction(1, 2)), 100_000, seed=11)
    check_batch(batch)
    freq = np.mean(batch.samples[:, 0] == 0)
    assert abs(freq - 0.5) < 3 * np.sqrt(0.25 / 100_000)


def test_single_cell_dpp_sampler_is_fair():
    batch = sample_dpp(kernel(1, 1, 0.5), 100_000, seed=12)
    freq = np.mean(batch.samples[:, 0] == 0)
    assert abs(freq - 0.5) < 3 * np.sqrt(0.25 / 100_000)


def test_empty_batch():
    batch = sample_exact(ModelParams(2, 2, Fraction(1, 2)), 0, seed=1)
    assert batch.samples.shape == (0, 2)
    assert sample_dpp(kernel(2, 2, 0.5), 0, seed=1).samples.shape == (0, 2)


@pytest.mark.parametrize("method", ["exact", "dpp"])
def test_fixed_seed_is_byte_identical(method):
    mp = ModelParams(3, 3, Fraction(7, 10))
    draw = (lambda: sample_exact(mp, 2000, 99)) if method == "exact" else (lambda: sample_dpp(kernel(3, 3, 0.7), 2000, 99))
    assert draw().samples.tobytes() == draw().samples.tobytes()


def test_dpp_output_independent_of_chunking_and_workers():
    K = kernel(4, 5, 0.8)
    ref = sample_dpp(K, 700, seed=5).samples
    assert np.array_equal(ref, sample_dpp(K, 700, seed=5, chunk_elements=97).samples)
    assert np.array_equal(ref, sample_dpp(K, 700, seed=5, chunk_elements=97, workers=3).samples)
    # a prefix of a larger batch is the smaller batch
    assert np.array_equal(ref[:300], sample_dpp(K, 300, seed=5).samples)


@pytest.mark.parametrize("method", ["exact", "dpp"])
def test_chi_square_two_by_two(method, spec):
    mp = ModelParams(2, 2, Fraction(7, 10), spec)
    if method == "exact":
        batch = sample_exact(mp, 100_000, seed=21)
    else:
        batch = sample_dpp(kernel(2, 2, 0.7, spec), 100_000, seed=21, params=mp)
    check_batch(batch)
    _, pvalue = chi_square_test(batch, distribution(mp))
    assert pvalue > 1e-3


@pytest.mark.parametrize("q", [0.5, 1.5])
def test_one_point_frequencies_within_binomial_bands(q, spec):
    mp = ModelParams(3, 4, Fraction(q), spec)
    K = kernel(3, 4, q, spec)
    batch = sample_dpp(K, 40_000, seed=8, params=mp)
    occ = np.array([np.mean(np.any(batch.samples == a, axis=1)) for a in range(mp.N + 1)])
    p = np.array([float(x) for x in one_point_marginals(mp)])
    assert np.all(np.abs(occ - p) <= 4 * np.sqrt(p * (1 - p) / 40_000) + 1e-12)


def test_trace_check():
    K = kernel(3, 3, 0.5)
    with pytest.raises(ValueError):
        sample_dpp(KernelMatrix(basis=K.basis * 1.01, params=K.params), 10, seed=0)
    with pytest.raises(ValueError):
        sample_dpp(K, 10, seed=0, n=2)


def test_empirical_density_normalisation():
    one = sample_exact(ModelParams(1, 1, Fraction(1, 2)), 1, seed=0)
    d = empirical_density(one, 2)
    assert d.mass.size == 2 and d.mass.sum() == 1
    batch = sample_dpp(kernel(5, 10, 0.9), 300, seed=3)
    for bins in (1, 4, 15, 40):
        d = empirical_density(batch, bins)
        assert d.mass.sum() == pytest.approx(5)
        assert d.edges[0] == 0 and d.edges[-1] == pytest.approx(15 / 5)
        assert np.all((d.density >= 0) & (d.density <= 1))
    with pytest.raises(ValueError):
        empirical_density(sample_exact(ModelParams(1, 1, Fraction(1, 2)), 0, seed=0), 3)


def test_linear_statistic_variance_matches_kernel_formula():
    mp = ModelParams.from_gamma(6, 9, 1.0)
    K = spectral_kernel(mp)
    batch = sample_dpp(K, 20_000, seed=4)
    X = linear_statistic(batch, lambda s: s)
    exact = dpp_linear_variance(K, np.exp(-np.arange(mp.N + 1) * mp.log_q))
    # the sample variance of 2e4 near-Gaussian draws is within ~1% of the truth
    assert np.var(X, ddof=1) == pytest.approx(exact, rel=0.05)
    assert np.allclose(linear_statistic(batch, np.ones_like), 6)


def test_batch_serialisation():
    batch = sample_exact(ModelParams(2, 3, Fraction(1, 2), "pip"), 3, seed=2)
    d = batch.to_dict()
    assert d["schema"] == 1 and d["method"] == "exact" and len(d["samples"]) == 3
    assert all(len(lam) == 2 for lam in batch.partitions())
