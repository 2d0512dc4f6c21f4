"""Average capacity of the correlated product channel, four ways.

* capacity_quadrature -- direct integration of log2(1+gamma) against the
  density, in the sqrt-SNR domain with scaled Bessel factors;
* capacity_series -- Meijer-G series: a Bessel power-series expansion
  turns the integral into a sum of Mellin-Barnes kernels, one per order;
* capacity_high_snr / capacity_high_snr_budget -- slope-1 asymptotes from
  the moment derivative at order zero;
* capacity_low_snr -- first-moment approximation.

AWGN and single-Rayleigh references used by the sweep datasets live here
too.  All functions are pure; estimates carry their method tag and an
error bound (NaN marks asymptotes, which have no computable remainder).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel_model import (
    ChannelParams,
    Parameterization,
    _pdf_t,
    moment_log_derivative,
    sqrt_domain_cutoff,
)
from .errors import ConvergenceError, UnsupportedParameterError
from .quadrature import tanh_sinh
from .special_functions import (
    AccuracyPolicy,
    DEFAULT_POLICY,
    EULER_GAMMA,
    LOG2E,
    GParams,
    exp_integral_e1_scaled,
    mellin_barnes_integral,
)

METHOD_QUADRATURE = "quadrature"
METHOD_SERIES = "series"
METHOD_ASYMPTOTIC_HIGH = "asymptotic_high"
METHOD_ASYMPTOTIC_LOW = "asymptotic_low"
METHOD_AWGN = "awgn_reference"
METHOD_RAYLEIGH = "rayleigh_reference"
METHOD_MC = "monte_carlo"

DEFAULT_SERIES_KMAX = 400


@dataclass(frozen=True)
class CapacityEstimate:
    value: float                     # bps/Hz
    method: str
    error_bound: float               # bps/Hz; NaN for asymptotes
    diagnostics: dict = field(default_factory=dict)


def capacity_quadrature(params: ChannelParams,
                        policy: AccuracyPolicy = DEFAULT_POLICY) -> CapacityEstimate:
    """E{log2(1 + gamma)} by tanh-sinh quadrature in t = sqrt(gamma)."""
    if not params.analytic_ok:
        raise UnsupportedParameterError(
            "rho = 1 is not integrable analytically; use Monte Carlo")
    t_max = sqrt_domain_cutoff(params, poly_power=2.0)

    def integrand(t):
        return LOG2E * np.log1p(t * t) * _pdf_t(params, t)

    res = tanh_sinh(integrand, 0.0, t_max, rel_tol=policy.rel_tol,
                    abs_tol=policy.abs_tol, max_nodes=policy.max_quadrature_nodes)
    if not res.converged:
        raise ConvergenceError(
            "capacity quadrature did not converge",
            {"gamma_bar": params.gamma_bar, "rho": params.rho,
             "nodes": res.n_nodes, "error_estimate": res.error_estimate})
    return CapacityEstimate(
        value=res.value,
        method=METHOD_QUADRATURE,
        error_bound=res.error_estimate,
        diagnostics={"nodes": res.n_nodes, "levels": res.levels, "t_max": t_max},
    )


def _series_kernel(k: int, z: float) -> GParams:
    """Mellin-Barnes kernel of the order-k series term; the feasible
    contour strip is (k+1, k+2) and the integrand decays like exp(-2 pi |t|)."""
    return GParams(m=4, n=1, p=2, q=4,
                   a_list=(-k - 1.0, -k * 1.0),
                   b_list=(0.0, 0.0, -k - 1.0, -k - 1.0),
                   z=z)


def capacity_series(params: ChannelParams,
                    policy: AccuracyPolicy = DEFAULT_POLICY,
                    k_max: int = DEFAULT_SERIES_KMAX) -> CapacityEstimate:
    """Capacity as the Bessel-series sum of Meijer-G kernel values.

    Terms decay roughly like rho^k, so high correlation needs many orders;
    the stopping rule requires two consecutive negligible terms because a
    single term can dip early.
    """
    if not params.analytic_ok:
        raise UnsupportedParameterError(
            "rho = 1 has no series representation; use Monte Carlo")
    if k_max < 1:
        raise UnsupportedParameterError("k_max must be >= 1")
    a, b = params.a, params.b
    z = 0.25 * a * a
    log_c1 = math.log(params.c1)

    if b == 0.0:
        # every higher-order coefficient carries (b/2)^{2k} = 0
        value, err, nodes = mellin_barnes_integral(
            _series_kernel(0, z), policy, log_prefactor=log_c1 - math.log(2.0))
        return CapacityEstimate(value, METHOD_SERIES, err,
                                {"terms_used": 1, "last_term": 0.0,
                                 "nodes": nodes})

    log_b_half = math.log(0.5 * b)
    total = 0.0
    mb_error = 0.0
    nodes = 0
    small_streak = 0
    lgamma = math.lgamma
    term = math.nan
    for k in range(k_max + 1):
        log_ck = log_c1 - math.log(2.0) + 2.0 * k * log_b_half - 2.0 * lgamma(k + 1.0)
        term, err, n = mellin_barnes_integral(
            _series_kernel(k, z), policy, log_prefactor=log_ck)
        total += term
        mb_error += err
        nodes += n
        if term <= policy.rel_tol * total:
            small_streak += 1
            if small_streak >= 2:
                return CapacityEstimate(
                    total, METHOD_SERIES, mb_error + term,
                    {"terms_used": k + 1, "last_term": term, "nodes": nodes})
        else:
            small_streak = 0
    raise ConvergenceError(
        "series did not meet the stopping rule; use capacity_quadrature",
        {"gamma_bar": params.gamma_bar, "rho": params.rho,
         "k_max": k_max, "last_term": term, "partial_sum": total})


def capacity_high_snr(params: ChannelParams) -> CapacityEstimate:
    """High-SNR asymptote log2(gbar) - 2 log2(e) gamma_e - log2(1+rho).

    Valid at rho = 1; may go negative at low SNR (callers judge
    applicability).  No remainder term exists, so the error bound is NaN.
    """
    value = math.log2(params.gamma_bar) + LOG2E * moment_log_derivative(params.rho)
    return CapacityEstimate(value, METHOD_ASYMPTOTIC_HIGH, math.nan,
                            {"kind": "asymptotic"})


def capacity_high_snr_budget(snr_I_linear: float) -> CapacityEstimate:
    """Fixed-power high-SNR asymptote log2(snr_I) - 2 log2(e) gamma_e.

    Correlation-independent: the log2(1+rho) loss cancels against the
    (1+rho) mean-SNR gain of a fixed transmit power.
    """
    if not (snr_I_linear > 0):
        raise UnsupportedParameterError("snr_I must be positive")
    value = math.log2(snr_I_linear) - 2.0 * LOG2E * EULER_GAMMA
    return CapacityEstimate(value, METHOD_ASYMPTOTIC_HIGH, math.nan,
                            {"kind": "asymptotic"})


def capacity_low_snr(param: Parameterization) -> CapacityEstimate:
    """Low-SNR first-moment approximation log2(e) * E{gamma}, in bits.

    Under a fixed power budget E{gamma} = snr_I (1+rho), so correlation
    helps linearly here.
    """
    value = LOG2E * param.gamma_bar
    return CapacityEstimate(value, METHOD_ASYMPTOTIC_LOW, math.nan,
                            {"kind": "asymptotic"})


def capacity_awgn(snr_linear: float) -> CapacityEstimate:
    """Unfaded reference log2(1 + snr)."""
    if not (snr_linear > 0):
        raise UnsupportedParameterError("snr must be positive")
    return CapacityEstimate(LOG2E * math.log1p(snr_linear), METHOD_AWGN, 0.0,
                            {"kind": "reference"})


def capacity_rayleigh(snr_linear: float) -> CapacityEstimate:
    """Single-Rayleigh ergodic capacity log2(e) e^{1/s} E1(1/s), exact at
    every SNR so the reference curve is trustworthy outside the asymptotic
    regime too."""
    if not (snr_linear > 0):
        raise UnsupportedParameterError("snr must be positive")
    value = LOG2E * exp_integral_e1_scaled(1.0 / snr_linear)
    return CapacityEstimate(value, METHOD_RAYLEIGH, 0.0, {"kind": "reference"})


@dataclass(frozen=True)
class CrossoverReport:
    """Tightness of the high-SNR asymptote over an SNR grid at fixed rho."""

    rho: float
    snr_db_grid: tuple
    gaps: tuple                      # |quadrature - asymptote| per point
    monotone_decreasing: bool
    final_gap: float


def asymptote_crossover_check(params: ChannelParams,
                              policy: AccuracyPolicy = DEFAULT_POLICY,
                              snr_db_grid=(20.0, 30.0, 40.0)) -> CrossoverReport:
    """Quantify where the slope-1 asymptote becomes tight for params.rho."""
    gaps = []
    for snr_db in snr_db_grid:
        p = ChannelParams(10.0 ** (snr_db / 10.0), params.rho)
        gaps.append(abs(capacity_quadrature(p, policy).value
                        - capacity_high_snr(p).value))
    mono = all(gaps[i + 1] < gaps[i] for i in range(len(gaps) - 1))
    return CrossoverReport(params.rho, tuple(snr_db_grid), tuple(gaps),
                           mono, gaps[-1])
