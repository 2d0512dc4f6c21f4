"""Monte Carlo module tests: sampler law, determinism, oracle agreement.

The exact rho = 1 capacity at 40 dB receiver SNR (E log2(1 + gbar g^2/2),
g unit exponential) was frozen from 25-digit quadrature.
"""

import math

import numpy as np
import pytest

from backscatter_capacity.capacity import capacity_quadrature
from backscatter_capacity.channel_model import (
    FIXED_POWER_BUDGET,
    FIXED_RECEIVER_SNR,
    ChannelParams,
    Parameterization,
)
from backscatter_capacity.errors import ConfigError, DomainError, UnsupportedParameterError
from backscatter_capacity.monte_carlo import (
    KsResult,
    McConfig,
    _batch_means,
    _draw_pairs,
    batch_rng,
    estimate_capacity,
    estimate_moment,
    ks_test,
    ks_test_marginal,
    sample_pair,
)

RHO1_CAPACITY_40DB = 10.684820137470785

CFG = McConfig(n_samples=200_000, seed=901, n_batches=100)


class TestConfig:
    def test_invariants(self):
        with pytest.raises(ConfigError):
            McConfig(n_samples=50, n_batches=100)
        with pytest.raises(ConfigError):
            McConfig(n_samples=5_000, n_batches=100)  # <100 per batch
        with pytest.raises(ConfigError):
            McConfig(seed=-1)

    def test_batch_sizes_cover_everything(self):
        cfg = McConfig(n_samples=100_050, seed=1, n_batches=100)
        sizes = cfg.batch_sizes()
        assert sum(sizes) == cfg.n_samples
        assert max(sizes) - min(sizes) <= 1


class TestSampler:
    def test_rho_one_links_identical(self):
        rng = batch_rng(3, 0)
        for _ in range(5):
            s = sample_pair(rng, 1.0)
            assert s.g_f == s.g_b

    def test_rho_zero_uncorrelated(self):
        g_f, g_b = _draw_pairs(batch_rng(5, 0), 0.0, 1_000_000)
        cov = float(np.mean(g_f * g_b)) - 1.0
        se = float(np.std(g_f * g_b)) / 1000.0
        assert abs(cov) <= 3.0 * se

    def test_product_mean_tracks_one_plus_rho(self):
        g_f, g_b = _draw_pairs(batch_rng(6, 0), 0.5, 1_000_000)
        prod = g_f * g_b
        se = float(np.std(prod)) / 1000.0
        assert float(np.mean(prod)) == pytest.approx(1.5, abs=3.0 * se)

    @pytest.mark.parametrize("rho", [0.0, 0.25, 0.5, 0.75, 0.9, 1.0])
    def test_power_correlation_calibrated(self, rho):
        g_f, g_b = _draw_pairs(batch_rng(7, int(rho * 100)), rho, 1_000_000)
        r = float(np.corrcoef(g_f, g_b)[0, 1])
        assert r == pytest.approx(rho, abs=0.005)

    def test_unit_means(self):
        g_f, g_b = _draw_pairs(batch_rng(8, 0), 0.7, 1_000_000)
        assert float(np.mean(g_f)) == pytest.approx(1.0, abs=0.004)
        assert float(np.mean(g_b)) == pytest.approx(1.0, abs=0.004)

    def test_domain(self):
        with pytest.raises(DomainError):
            sample_pair(batch_rng(1, 0), 1.5)


class TestEstimates:
    def test_capacity_within_3se_of_quadrature(self):
        for gbar, rho in ((1000.0, 0.0), (1.0, 0.5)):
            res = estimate_capacity(
                Parameterization(FIXED_RECEIVER_SNR, gbar, rho), CFG)
            ref = capacity_quadrature(ChannelParams(gbar, rho)).value
            assert abs(res.estimate - ref) <= 3.0 * res.std_error

    def test_bit_reproducible(self):
        param = Parameterization(FIXED_RECEIVER_SNR, 10.0, 0.3)
        r1 = estimate_capacity(param, CFG)
        r2 = estimate_capacity(param, CFG)
        assert r1.estimate == r2.estimate
        assert r1.batch_estimates == r2.batch_estimates

    def test_aggregation_is_order_insensitive(self):
        # combining the same batch sums in any order gives the same bits,
        # which is what makes parallel execution irrelevant to the result
        param = Parameterization(FIXED_RECEIVER_SNR, 10.0, 0.3)
        estimate, _se, means = _batch_means(param, CFG, np.log1p)
        sizes = CFG.batch_sizes()
        sums = [m * s for m, s in zip(means, sizes)]
        rng = np.random.default_rng(0)
        for _ in range(3):
            order = rng.permutation(len(sums))
            shuffled = math.fsum(sums[i] for i in order) / CFG.n_samples
            assert shuffled == estimate

    def test_fixed_receiver_normalization_matches_budget_construction(self):
        # gamma_i streams coincide when gamma_bar = snr_I (1+rho)
        rho = 0.8
        snr_I = 5.0
        r_budget = estimate_capacity(
            Parameterization(FIXED_POWER_BUDGET, snr_I, rho), CFG)
        r_receiver = estimate_capacity(
            Parameterization(FIXED_RECEIVER_SNR, snr_I * (1 + rho), rho), CFG)
        assert r_budget.estimate == r_receiver.estimate

    def test_rho_one_against_frozen_exact_value(self):
        cfg = McConfig(n_samples=1_000_000, seed=424, n_batches=100)
        res = estimate_capacity(
            Parameterization(FIXED_RECEIVER_SNR, 1e4, 1.0), cfg)
        assert abs(res.estimate - RHO1_CAPACITY_40DB) <= 3.0 * res.std_error

    def test_rho_one_consistent_with_near_one_quadrature(self):
        cfg = McConfig(n_samples=1_000_000, seed=425, n_batches=100)
        res = estimate_capacity(
            Parameterization(FIXED_RECEIVER_SNR, 100.0, 1.0), cfg)
        ref = capacity_quadrature(ChannelParams(100.0, 0.9999)).value
        assert abs(res.estimate - ref) <= 3.0 * res.std_error

    def test_moment_first_order_unbiased(self):
        res = estimate_moment(Parameterization(FIXED_RECEIVER_SNR, 7.0, 0.6),
                              1, CFG)
        assert abs(res.estimate - 7.0) <= 3.0 * res.std_error

    def test_moment_second_order(self):
        res = estimate_moment(Parameterization(FIXED_RECEIVER_SNR, 1.0, 0.5),
                              2, CFG)
        assert abs(res.estimate - 52.0 / 9.0) <= 3.0 * res.std_error
        res = estimate_moment(Parameterization(FIXED_RECEIVER_SNR, 1.0, 1.0),
                              2, CFG)
        assert abs(res.estimate - 6.0) <= 3.0 * res.std_error

    def test_moment_order_domain(self):
        with pytest.raises(DomainError):
            estimate_moment(Parameterization(FIXED_RECEIVER_SNR, 1.0, 0.5), 5, CFG)


class TestKs:
    def test_product_law_passes(self):
        cfg = McConfig(n_samples=50_000, seed=77, n_batches=100)
        res = ks_test(Parameterization(FIXED_RECEIVER_SNR, 1.0, 0.5), cfg)
        assert isinstance(res, KsResult)
        assert res.critical_value == pytest.approx(1.6276 / math.sqrt(50_000))
        assert res.passed

    def test_double_rayleigh_case_passes(self):
        cfg = McConfig(n_samples=50_000, seed=78, n_batches=100)
        assert ks_test(Parameterization(FIXED_RECEIVER_SNR, 1.0, 0.0), cfg).passed

    def test_mis_scaled_sampler_fails(self):
        from backscatter_capacity.monte_carlo import _cdf_at_sorted, _ks_statistic
        cfg = McConfig(n_samples=20_000, seed=79, n_batches=100)
        param = Parameterization(FIXED_RECEIVER_SNR, 1.0, 0.5)
        from backscatter_capacity.monte_carlo import _draw_all
        gamma = np.sort(_draw_all(param, cfg) * 2.0)
        d = _ks_statistic(_cdf_at_sorted(param.channel_params(), gamma))
        assert d > 1.6276 / math.sqrt(cfg.n_samples)

    def test_marginals_exponential(self):
        cfg = McConfig(n_samples=50_000, seed=80, n_batches=100)
        for link in ("forward", "backward"):
            assert ks_test_marginal(0.9, cfg, link).passed

    def test_rho_one_unsupported(self):
        with pytest.raises(UnsupportedParameterError):
            ks_test(Parameterization(FIXED_RECEIVER_SNR, 1.0, 1.0), CFG)
