"""Double-exponential (tanh-sinh) quadrature on finite intervals.

The transform x = mid + half*tanh(pi/2 * sinh(u)) clusters nodes at both
endpoints, which absorbs the logarithmic endpoint singularity of the
K0-type integrands evaluated here.  Refinement halves the trapezoidal
step in u and reuses previous nodes; the error estimate is the change
between consecutive levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

_HALF_PI = math.pi / 2.0
# |u| beyond this leaves the endpoint offset subnormal and adds nothing.
_U_MAX = 6.0


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    n_nodes: int
    levels: int
    converged: bool


def _level_nodes(h: float, odd_only: bool) -> np.ndarray:
    """Positive u nodes for one refinement level."""
    if odd_only:
        u = np.arange(h, _U_MAX, 2.0 * h)
    else:
        u = np.arange(0.0, _U_MAX, h)
    return u


def _transform(u: np.ndarray, a: float, b: float):
    """Map u to nodes in (a, b) plus weights, endpoint-offset safe.

    Offsets from the endpoints are computed directly from
    1 - tanh(t) = 2/(1 + e^{2t}) so nodes never round onto a or b.
    """
    half = 0.5 * (b - a)
    t = _HALF_PI * np.sinh(u)
    et = np.exp(-2.0 * np.abs(t))
    # distance from the nearer endpoint, exact for large |t|
    delta = half * 2.0 * et / (1.0 + et)
    x = np.where(t >= 0, b - delta, a + delta)
    sech2 = 4.0 * et / (1.0 + et) ** 2
    w = half * _HALF_PI * np.cosh(u) * sech2
    keep = (delta > 0) & (w > 0)
    return x[keep], w[keep]


def tanh_sinh(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-14,
    max_nodes: int = 200_000,
) -> QuadratureResult:
    """Integrate a vectorized integrand over [a, b].

    f must accept an ndarray of abscissae strictly inside (a, b) and
    return finite values there; integrable endpoint singularities are
    allowed.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("finite interval required")
    if a == b:
        return QuadratureResult(0.0, 0.0, 0, 0, True)
    if a > b:
        res = tanh_sinh(f, b, a, rel_tol, abs_tol, max_nodes)
        return QuadratureResult(-res.value, res.error_estimate,
                                res.n_nodes, res.levels, res.converged)

    def level_sum(h: float, odd_only: bool) -> tuple[float, int]:
        u_pos = _level_nodes(h, odd_only)
        total = 0.0
        count = 0
        for sign in (1.0, -1.0):
            u = sign * u_pos
            if sign < 0:
                u = u[u_pos > 0]  # u = 0 only once
            x, w = _transform(u, a, b)
            if x.size == 0:
                continue
            total += float(np.sum(w * f(x)))
            count += x.size
        return total, count

    h = 1.0
    raw, n_nodes = level_sum(h, odd_only=False)
    value = h * raw
    err = math.inf
    level = 0
    while n_nodes < max_nodes:
        level += 1
        h *= 0.5
        odd, n_new = level_sum(h, odd_only=True)
        n_nodes += n_new
        new_value = 0.5 * value + h * odd
        err = abs(new_value - value)
        value = new_value
        if level >= 2 and err <= max(rel_tol * abs(value), abs_tol):
            return QuadratureResult(value, err, n_nodes, level, True)
    return QuadratureResult(value, err, n_nodes, level, False)


@lru_cache(maxsize=8)
def gauss_legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached Gauss-Legendre nodes/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def exponential_tail_cutoff(decay: float, poly_power: float,
                            log_drop: float = 46.0) -> float:
    """Upper limit T where exp(-decay*t)*t^poly_power has dropped by
    exp(-log_drop) relative to its peak."""
    if decay <= 0:
        raise ValueError("decay must be positive")
    if poly_power <= 0:
        return log_drop / decay
    t_star = poly_power / decay
    t = t_star + log_drop / decay
    for _ in range(4):
        t = t_star + (log_drop + poly_power * math.log(t / t_star)) / decay
    return t
