import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carleson_frames import (
    CarlesonSpectrum,
    ExponentSet,
    gamma_const,
    log_block_density,
    ms_sum,
    theta,
    theta_sup_check,
)
from carleson_frames.exponents import (
    DIVERGENT_ANALYTIC,
    DIVERGENT_NUMERIC,
    INCONCLUSIVE,
    block_count_check,
    block_sums,
    select_subsequence,
)


def test_ms_sum_jittered_is_analytically_divergent():
    _, verdict = ms_sum(ExponentSet.jittered(3, 50, seed=0))
    assert verdict == DIVERGENT_ANALYTIC


def test_ms_sum_dyadic_inconclusive():
    partial, verdict = ms_sum(ExponentSet.dyadic(60))
    # 1/2 + sum_{k>=1} 2**-k bounds the series
    assert partial < 2 and verdict == INCONCLUSIVE
    oracle = sum(2.0**k / (4.0**k + 1) for k in range(60))
    assert partial == pytest.approx(oracle, rel=1e-14)


def test_ms_sum_numeric_threshold():
    lam = ExponentSet.explicit(np.arange(1, 100000, dtype=float))
    assert ms_sum(lam, threshold=5.0)[1] == DIVERGENT_NUMERIC


def test_theta_geometric():
    lam = ExponentSet.naturals(200, N=2)
    th = theta(lam, 0.5)
    assert th.value == pytest.approx(4 / 3, rel=1e-14)
    assert th.tail_bound < 1e-50


def test_theta_zero_convention():
    assert theta(ExponentSet.naturals(10), 0.0).value == 1.0
    assert theta(ExponentSet.explicit([0.5, 1.0]), 0.0).value == 0.0


def test_theta_tail_bound_is_valid():
    lam = ExponentSet.jittered(2, 5000, seed=4)
    z = 0.97
    short = theta(lam, z, 50)
    full = theta(lam, z)
    assert short.value <= full.value <= short.upper


def test_theta_sup_naturals_tends_to_one():
    lam = ExponentSet.naturals(1 << 22)
    sup = theta_sup_check(lam)
    assert sup <= 1.0 + 1e-12
    assert sup > 0.99


def test_theta_sup_even_subset():
    assert theta_sup_check(ExponentSet.naturals(1 << 20, N=2)) <= 1.0 + 1e-12


def test_gamma_closed_form():
    s = CarlesonSpectrum.from_points([0.5, 0.7])
    g = gamma_const(s, ExponentSet.naturals(400), 1)
    assert g == pytest.approx(1.0, rel=1e-14)


@given(st.lists(st.integers(0, 400), min_size=1, max_size=60, unique=True),
       st.floats(0.01, 0.999))
@settings(max_examples=60)
def test_gamma_at_most_one_for_integer_sets(vals, r):
    lam = ExponentSet.explicit(sorted(vals))
    s = CarlesonSpectrum.from_points([r])
    assert gamma_const(s, lam, 1) <= 1 + 1e-10


def test_block_sums_against_loop():
    lam = ExponentSet.jittered(2, 3000, seed=1)
    t = [10.0, 100.0, 500.0]
    got = block_sums(lam, 4.0, t)
    for ti, gi in zip(t, got):
        oracle = sum(1 / v for v in lam.values if ti <= v <= 4 * ti)
        assert gi == pytest.approx(oracle, rel=1e-12)


@pytest.mark.parametrize("N", [1, 2, 3, 5])
def test_density_arithmetic(N):
    count = int(16e4 / N) + 2
    rep = log_block_density(ExponentSet.jittered(N, count, seed=N))
    assert rep.L_estimate == pytest.approx(1 / N, rel=0.1)
    assert len(rep.table) == 4 * 41


def test_density_dyadic():
    rep = log_block_density(ExponentSet.dyadic(20))
    assert rep.L_estimate < 0.05


def test_density_warns_when_short():
    with pytest.warns(RuntimeWarning):
        rep = log_block_density(ExponentSet.naturals(100))
    assert rep.warnings


def test_density_grid_validation():
    with pytest.raises(ValueError):
        log_block_density(ExponentSet.naturals(10), mu_grid=[1.0])


def test_block_count_dyadic_false():
    assert not block_count_check(ExponentSet.dyadic(20), 1, 5, 30)


def test_block_count_union():
    a = ExponentSet.jittered(2, 200, seed=1).values
    b = ExponentSet.jittered(2, 200, seed=2).values
    lam = ExponentSet.explicit(np.unique(np.concatenate([a, b])))
    assert block_count_check(lam, 2, 3, 150)
    sub = select_subsequence(lam, 2, 150)
    jit = sub.values - 2 * np.arange(151)
    assert np.all((jit >= 0) & (jit < 2))
    assert set(sub.values) <= set(lam.values)


def test_select_subsequence_empty_block():
    with pytest.raises(ValueError, match="no exponent"):
        select_subsequence(ExponentSet.dyadic(10), 1, 20)
