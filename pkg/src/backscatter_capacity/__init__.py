"""Ergodic capacity of backscatter links over correlated Rayleigh product fading.

Four mutually cross-checking evaluation routes: direct quadrature of the
product-fading density, a Meijer-G series, high/low-SNR asymptotes, and a
seedable Monte Carlo oracle, plus a CLI that emits deterministic sweep and
figure datasets.
"""

from .capacity import (
    CapacityEstimate,
    asymptote_crossover_check,
    capacity_awgn,
    capacity_high_snr,
    capacity_high_snr_budget,
    capacity_low_snr,
    capacity_quadrature,
    capacity_rayleigh,
    capacity_series,
)
from .channel_model import (
    FIXED_POWER_BUDGET,
    FIXED_RECEIVER_SNR,
    ChannelParams,
    LinkBudget,
    Parameterization,
    budget_to_snr,
    cdf,
    moment,
    moment_log_derivative,
    params_from_power_budget,
    params_from_receiver_snr,
    pdf,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    ParameterError,
    PoleError,
    UnsupportedParameterError,
)
from .monte_carlo import (
    FadingPairSample,
    KsResult,
    McConfig,
    McResult,
    batch_rng,
    estimate_capacity,
    estimate_moment,
    ks_test,
    ks_test_marginal,
    sample_pair,
)
from .special_functions import (
    AccuracyPolicy,
    GParams,
    bessel_i0_scaled,
    bessel_k0_scaled,
    digamma,
    exp_integral_e1,
    hyp2f1_cross_derivative,
    hyp2f1_neg_int,
    ln_gamma_complex,
    meijer_g,
)

__version__ = "0.1.0"
