import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qkrawtchouk import partitions as P
from qkrawtchouk.ensemble import QKParams
from qkrawtchouk.measures import (
    ModelParams,
    Spec,
    distribution,
    dual_schur_principal,
    log_prob,
    norm_const_ratio,
    normalizing_constant,
    one_point_marginals,
    partition_function,
    prob,
    prob_determinantal,
    schur_principal,
    schur_ssyt_oracle,
    weight,
)

from conftest import Q_GRID

# exact probabilities at n = k = 2, q = 1/2, frozen from the tableau-sum oracle
FROZEN_2x2 = {
    "pp": {(0, 0): "1/18", (1, 0): "1/4", (1, 1): "7/36", (2, 0): "7/36", (2, 1): "1/4", (2, 2): "1/18"},
    "pip": {(0, 0): "8/45", (1, 0): "2/5", (1, 1): "7/45", (2, 0): "7/45", (2, 1): "1/10", (2, 2): "1/90"},
}


def test_frozen_probabilities(spec):
    mp = ModelParams(2, 2, Fraction(1, 2), spec)
    got = {lam: prob(lam, mp) for lam in P.enumerate_in_box(2, 2)}
    assert got == {lam: Fraction(v) for lam, v in FROZEN_2x2[spec].items()}


@pytest.mark.parametrize("q", [Fraction(1, 3), Fraction(7, 2), Fraction(1)])
def test_single_cell_box_is_a_fair_coin(q, spec):
    mp = ModelParams(1, 1, q, spec)
    assert prob((), mp) == prob((1,), mp) == Fraction(1, 2)


def test_classical_limit_is_binomial():
    mp = ModelParams(1, 2, 1)
    assert [prob((j,), mp) for j in range(3)] == [Fraction(math.comb(2, j), 4) for j in range(3)]


small_boxes = st.tuples(st.integers(1, 3), st.integers(1, 3), st.sampled_from(Q_GRID))


@given(small_boxes, st.data())
def test_principal_schur_against_tableaux(box, data):
    n, k, q = box
    lam = data.draw(st.sampled_from(list(P.enumerate_in_box(n, k))))
    xs = [q**i for i in range(n)]
    assert schur_principal(lam, n, q) == schur_ssyt_oracle(lam, xs)
    dual = P.complement_conjugate(lam, n, k)
    ys = [q**j for j in range(k)]
    assert dual_schur_principal(lam, n, k, q) == schur_ssyt_oracle(dual, ys)


@pytest.mark.parametrize("n,k", [(1, 3), (2, 2), (2, 3), (3, 3)])
@pytest.mark.parametrize("q", Q_GRID)
def test_normalization_and_forms(n, k, q, spec):
    mp = ModelParams(n, k, q, spec)
    dist = distribution(mp)
    assert sum(dist.values()) == 1
    assert all(prob_determinantal(lam, mp) == p for lam, p in dist.items())


@pytest.mark.parametrize("n,k", [(1, 2), (2, 2), (2, 3), (3, 2), (3, 3)])
@pytest.mark.parametrize("q", [Fraction(1, 2), Fraction(2, 3), Fraction(2)])
def test_normalizing_constant_closed_form(n, k, q, spec):
    mp = ModelParams(n, k, q, spec)
    assert normalizing_constant(mp) * partition_function(mp) == 1
    # the uncorrected candidate is off by a pure power of q and of (1 - q)
    e = n * (n - 1) // 2
    extra = 0 if spec == "pp" else n * k * (k - 1) // 2 + n * (n - 1) * (2 * k + n - 3) // 2
    assert norm_const_ratio(mp) == 1 / ((1 - q) ** e * q**extra)


@given(st.integers(1, 5), st.integers(1, 6), st.sampled_from(Q_GRID + [Fraction(3, 4)]), st.sampled_from(list(Spec)), st.data())
def test_weight_ratio(n, k, q, spec, data):
    mp = ModelParams(n, k, q, spec)
    qk = QKParams.from_model(mp)
    N = mp.N
    a = data.draw(st.integers(0, N - 1))
    ratio = weight(a + 1, mp) / weight(a, mp)
    expected = q ** (a - N) / qk.p * (1 - q ** (N - a)) / (1 - q ** (a + 1))
    assert ratio == expected
    # one more power of q in the exponent would overshoot by exactly q
    assert q ** (a + 1 - N) / qk.p * (1 - q ** (N - a)) / (1 - q ** (a + 1)) == q * ratio


def test_weight_ratio_small_case():
    mp = ModelParams(1, 2, Fraction(1, 2))
    q = mp.q
    assert weight(1, mp) / weight(0, mp) == (1 + q) / q


@pytest.mark.parametrize("q", [0.6, 0.95, 1.3])
def test_log_prob_matches_product(q, spec):
    mp = ModelParams(3, 4, q, spec)
    for lam in P.enumerate_in_box(3, 4):
        assert log_prob(lam, mp) == pytest.approx(math.log(prob(lam, mp)), abs=1e-11)


def test_log_prob_at_large_size():
    mp = ModelParams.from_gamma(200, 300, -0.5)
    lam = tuple(range(300, 100, -1))
    assert math.isfinite(log_prob(lam, mp))


def test_marginals_sum_to_n(spec):
    mp = ModelParams(3, 2, Fraction(2, 5), spec)
    assert sum(one_point_marginals(mp)) == 3


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(0, 2, 0.5)
    with pytest.raises(ValueError):
        ModelParams(2, 2, -1.0)
    assert ModelParams(2, 2, "3/4").q == Fraction(3, 4)
    assert ModelParams.from_gamma(10, 5, 1.0).q == pytest.approx(math.exp(-0.1))


def test_box_violations():
    mp = ModelParams(2, 2, Fraction(1, 2))
    with pytest.raises(P.BoxError):
        prob((3,), mp)
