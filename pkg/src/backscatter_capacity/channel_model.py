"""Correlated Rayleigh product channel: link budget, SNR distribution,
moments, and the two SNR parameterizations.

The instantaneous SNR is gamma = snr_scale * g_f * g_b with unit-mean
exponential power gains whose power correlation is rho, so
E{g_f g_b} = 1 + rho.  Two conventions coexist:

* fixed receiver SNR: gamma_bar = E{gamma} is prescribed directly;
* fixed power budget: the transmit-referenced SNR snr_I is prescribed
  and the receiver mean picks up the correlation bonus,
  gamma_bar = snr_I * (1 + rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedParameterError
from .quadrature import exponential_tail_cutoff, tanh_sinh
from .special_functions import (
    AccuracyPolicy,
    DEFAULT_POLICY,
    EULER_GAMMA,
    bessel_i0_scaled,
    bessel_k0_scaled,
    hyp2f1_symmetric,
    ln_gamma_complex,
)

FIXED_RECEIVER_SNR = "fixed_receiver_snr"
FIXED_POWER_BUDGET = "fixed_power_budget"
MODES = (FIXED_RECEIVER_SNR, FIXED_POWER_BUDGET)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power, aggregate loss and noise power of the reader link."""

    transmit_power: float       # watts
    aggregate_loss: float       # linear gain in (0, 1]
    noise_power: float          # watts

    def __post_init__(self):
        if not (self.transmit_power > 0 and self.noise_power > 0):
            raise DomainError("powers must be strictly positive")
        if not (0.0 < self.aggregate_loss <= 1.0):
            raise DomainError("aggregate loss must lie in (0, 1]")

    @property
    def equivalent_noise(self) -> float:
        """Noise referred to the transmitter output."""
        return self.noise_power / self.aggregate_loss


def budget_to_snr(budget: LinkBudget) -> float:
    """Transmit-referenced SNR P_T * L_t / N_0."""
    return budget.transmit_power * budget.aggregate_loss / budget.noise_power


@dataclass(frozen=True)
class ChannelParams:
    """Mean receiver SNR and power correlation, with the derived kernel
    constants of the product-fading density."""

    gamma_bar: float
    rho: float

    def __post_init__(self):
        if not (self.gamma_bar > 0 and math.isfinite(self.gamma_bar)):
            raise DomainError("gamma_bar must be positive and finite")
        if not (0.0 <= self.rho <= 1.0):
            raise DomainError("rho must lie in [0, 1]")

    @property
    def analytic_ok(self) -> bool:
        """Density/series paths need rho < 1 (kernel constants diverge)."""
        return self.rho < 1.0

    def _require_analytic(self):
        if not self.analytic_ok:
            raise UnsupportedParameterError(
                "rho = 1 has no analytic density; use Monte Carlo or the asymptotes")

    @property
    def a(self) -> float:
        self._require_analytic()
        return (2.0 / (1.0 - self.rho)) * math.sqrt((1.0 + self.rho) / self.gamma_bar)

    @property
    def b(self) -> float:
        return self.a * math.sqrt(self.rho)

    @property
    def c1(self) -> float:
        a = self.a
        return a * a * (1.0 - self.rho) / (2.0 * math.log(2.0))


@dataclass(frozen=True)
class Parameterization:
    """A swept SNR point: which convention the value uses, plus rho."""

    mode: str
    snr_value: float            # linear; gamma_bar or snr_I depending on mode
    rho: float

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")
        if not (self.snr_value > 0 and math.isfinite(self.snr_value)):
            raise DomainError("snr_value must be positive and finite")
        if not (0.0 <= self.rho <= 1.0):
            raise DomainError("rho must lie in [0, 1]")

    @property
    def gamma_bar(self) -> float:
        if self.mode == FIXED_RECEIVER_SNR:
            return self.snr_value
        return self.snr_value * (1.0 + self.rho)

    @property
    def snr_budget(self) -> float:
        if self.mode == FIXED_POWER_BUDGET:
            return self.snr_value
        return self.snr_value / (1.0 + self.rho)

    def channel_params(self) -> ChannelParams:
        return ChannelParams(self.gamma_bar, self.rho)


def params_from_receiver_snr(snr_db: float, rho: float) -> ChannelParams:
    """Channel at a prescribed mean receiver SNR given in dB."""
    return ChannelParams(db_to_linear(snr_db), rho)


def params_from_power_budget(snr_I_db: float, rho: float) -> ChannelParams:
    """Channel at a prescribed transmit-referenced SNR given in dB;
    the receiver mean is snr_I * (1 + rho)."""
    return ChannelParams(db_to_linear(snr_I_db) * (1.0 + rho), rho)


def pdf(params: ChannelParams, gamma):
    """Density of the instantaneous SNR.

    Evaluated in scaled form
        (2/gbar) ((1+rho)/(1-rho)) I0e(b s) K0e(a s) exp((b-a) s),  s = sqrt(gamma),
    which stays representable for any gamma where the raw Bessel product
    would overflow/underflow.
    """
    params._require_analytic()
    g = np.asarray(gamma, dtype=float)
    if np.any(g <= 0) or not np.all(np.isfinite(g)):
        raise DomainError("pdf requires gamma > 0")
    scalar = g.ndim == 0
    s = np.sqrt(np.atleast_1d(g))
    a, b = params.a, params.b
    pref = (2.0 / params.gamma_bar) * (1.0 + params.rho) / (1.0 - params.rho)
    vals = pref * bessel_i0_scaled(b * s) * bessel_k0_scaled(a * s) \
        * np.exp((b - a) * s)
    return float(vals[0]) if scalar else vals


def _pdf_t(params: ChannelParams, t: np.ndarray) -> np.ndarray:
    """Density transformed to t = sqrt(gamma):  pdf(t^2) * 2 t."""
    a, b = params.a, params.b
    pref = (2.0 / params.gamma_bar) * (1.0 + params.rho) / (1.0 - params.rho)
    return pref * 2.0 * t * bessel_i0_scaled(b * t) * bessel_k0_scaled(a * t) \
        * np.exp((b - a) * t)


def sqrt_domain_cutoff(params: ChannelParams, poly_power: float = 1.0) -> float:
    """Upper integration limit in t = sqrt(gamma) where the density tail
    exp(-(a-b) t) has dropped far below the working tolerances."""
    decay = params.a - params.b
    return exponential_tail_cutoff(decay, poly_power)


def cdf(params: ChannelParams, gamma, policy: AccuracyPolicy = DEFAULT_POLICY):
    """P(SNR <= gamma), by quadrature of the density in the sqrt domain."""
    params._require_analytic()
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise DomainError("cdf requires gamma >= 0")
    scalar = g.ndim == 0
    out = np.empty(np.atleast_1d(g).shape)
    t_cap = sqrt_domain_cutoff(params)
    for i, gi in enumerate(np.atleast_1d(g)):
        if gi == 0.0:
            out[i] = 0.0
            continue
        upper = min(math.sqrt(gi), t_cap)
        res = tanh_sinh(lambda t: _pdf_t(params, t), 0.0, upper,
                        rel_tol=policy.rel_tol, abs_tol=policy.abs_tol,
                        max_nodes=policy.max_quadrature_nodes)
        out[i] = min(res.value, 1.0)
    return float(out[0]) if scalar else out


def moment(params: ChannelParams, k: float) -> float:
    """E{gamma^k} = gamma_bar^k (1+rho)^{-k} Gamma(1+k)^2 2F1(-k,-k;1;rho).

    The (1+rho)^{-k} factor is what makes E{gamma} = gamma_bar exact; the
    quadrature tests adjudicate it against the density.
    """
    if k < 0:
        raise DomainError("moment order must be >= 0")
    rho = params.rho
    lg1k = ln_gamma_complex(complex(1.0 + k)).real
    if rho == 1.0:
        # Gauss summation: 2F1(-k,-k;1;1) = Gamma(1+2k)/Gamma(1+k)^2
        log_m = k * math.log(params.gamma_bar) - k * math.log(2.0) \
            + ln_gamma_complex(complex(1.0 + 2.0 * k)).real
        return math.exp(log_m)
    f = hyp2f1_symmetric(k, rho)
    log_m = k * math.log(params.gamma_bar) - k * math.log1p(rho) + 2.0 * lg1k
    return math.exp(log_m) * f


def moment_log_derivative(rho: float) -> float:
    """d/dk of the normalized moment E{gamma^k}/gamma_bar^k at k = 0:
    -2 gamma_e - ln(1+rho)."""
    if not (0.0 <= rho <= 1.0):
        raise DomainError("rho must lie in [0, 1]")
    return -2.0 * EULER_GAMMA - math.log1p(rho)
