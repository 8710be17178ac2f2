#!/usr/bin/env python3
#
#  query.py
#  sincheb
#
#  Fractional queries U^(m+r) from integer-power amplitudes through
#  Gaussian-windowed cardinal-sine interpolation, with the error and
#  uncertainty-propagation bounds that go with it.
#
#  This program is free software; you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation; version 2 of the License.
#
#  See the LICENSE file for more details.

import math
import numpy as np
from dataclasses import dataclass
from sincheb.common.core import DomainError, InvalidArgumentError, _get_logger, _log_event
from typing import Optional

logger = _get_logger("sinc")

q_bound_numerator = 4.0 * math.sqrt(2.0 * math.pi) + 8.0
q_bound_constant = q_bound_numerator / (math.pi * math.exp(1.0 / 3.0 + math.pi / 12.0))
spectral_constant = 8.0 / math.sqrt(2.0 * math.pi) + 2.0
variance_constant = 3.0 + 4.0 / math.pi ** 2
# interp_error_bound(q) times this covers tones up to |mu| = 1/4 for q <= 32
interp_safety_factor = 2.0


def _log(char: str, msg: str) -> None:
    """Logs an event on the sinc logger."""
    _log_event(logger, char, msg)


@dataclass(frozen=True, eq=False)
class SincPlan:
    """Window, base power and weights for one fractional query g/s_k = m + r."""

    q: int
    sigma: float
    sigma_f: float
    m: int
    r: float
    window_weights: np.ndarray
    w_r: float

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.q, self.q + 1)

    @property
    def weights(self) -> np.ndarray:
        return self.window_weights / self.w_r


@dataclass(frozen=True, eq=False)
class AmplitudeSeries:
    """Samples x~(n) at powers base_power + n for n = -q..q."""

    base_power: int
    samples: np.ndarray
    variances: Optional[np.ndarray] = None


def sinc(x) -> np.ndarray:
    """sin(pi x)/(pi x) with sinc(0) = 1 and exact zeros at the other integers."""
    x = np.asarray(x, dtype=float)
    at_int = x == np.round(x)
    return np.where(at_int, (x == 0).astype(float), np.sinc(x))


def window(t, sigma: float) -> np.ndarray:
    """Normalised Gaussian w(t) = exp(-t^2/(2 sigma^2)) / (sigma sqrt(2 pi))."""
    t = np.asarray(t, dtype=float)
    return np.exp(-t ** 2 / (2.0 * sigma ** 2)) / (sigma * math.sqrt(2.0 * math.pi))


def choose_q(eps_interp: float) -> int:
    """Smallest q >= 1 with q >= (6/pi) log((4 sqrt(2 pi) + 8) / (pi e^(1/3 + pi/12) eps))."""
    if not eps_interp > 0:
        raise InvalidArgumentError(f"eps_interp must be positive, got {eps_interp}")
    if eps_interp >= 1:
        _log("!", f"eps_interp = {eps_interp:g} >= 1, falling back to q = 1")
        return 1
    validity = math.pi ** 2 * eps_interp ** 2 / (math.exp(math.pi / 2) * q_bound_numerator ** 2)
    if validity > 1.0 / math.e:
        _log("!", f"q bound validity condition fails ({validity:.3g} > 1/e); the returned q may not be sufficient")
    q = math.ceil((6.0 / math.pi) * math.log(q_bound_constant / eps_interp))
    return max(1, q)


def interp_error_bound(q: int) -> float:
    """The error eps~ that the q bound guarantees for a given q."""
    return q_bound_constant * math.exp(-math.pi * q / 6.0)


def build_sinc_plan(q: int, g_over_sk: float) -> SincPlan:
    """Plan with sigma = sqrt((q+2)/pi), m = floor(g/s_k), r = g/s_k - m."""
    if q < 1:
        raise InvalidArgumentError(f"q must be >= 1, got {q}")
    sigma = math.sqrt((q + 2) / math.pi)
    m = math.floor(g_over_sk)
    r = float(g_over_sk - m)
    n = np.arange(-q, q + 1)
    if r == 0.0:
        kernel = (n == 0).astype(float)
    else:
        kernel = sinc(r - n)
    window_weights = kernel * window(n, sigma)
    window_weights.flags.writeable = False
    return SincPlan(q=q, sigma=sigma, sigma_f=1.0 / (4.0 * math.pi * sigma), m=int(m), r=r, window_weights=window_weights, w_r=float(window(r, sigma)))


def _check_series(series: AmplitudeSeries, plan: SincPlan) -> np.ndarray:
    """Samples of a series that matches the plan's stencil and base power."""
    samples = np.asarray(series.samples, dtype=complex)
    if samples.shape != (2 * plan.q + 1,):
        raise InvalidArgumentError(f"series has {samples.size} samples, plan needs {2 * plan.q + 1}")
    if series.base_power != plan.m:
        raise InvalidArgumentError(f"series base power {series.base_power} does not match plan m = {plan.m}")
    return samples


def sinc_estimate(series: AmplitudeSeries, plan: SincPlan) -> complex:
    """Interpolated amplitude at power m + r."""
    samples = _check_series(series, plan)
    if plan.r == 0.0:
        return complex(samples[plan.q]) * 1.0
    return complex(np.dot(plan.window_weights, samples) / plan.w_r)


def sinc_variance(series: AmplitudeSeries, plan: SincPlan) -> float:
    """Variance of sinc_estimate for independent samples with the series' variances."""
    _check_series(series, plan)
    if series.variances is None:
        return 0.0
    variances = np.asarray(series.variances, dtype=float)
    return float(np.dot(plan.weights ** 2, variances))


def spectral_error_bound(sigma: float) -> float:
    """(8/sqrt(2 pi) + 2) exp(-pi^2 sigma^2 / 2) for sigma >= 1/(4 pi)."""
    if sigma < 1.0 / (4.0 * math.pi):
        raise DomainError(f"spectral bound needs sigma >= 1/(4 pi), got {sigma}")
    return spectral_constant * math.exp(-math.pi ** 2 * sigma ** 2 / 2.0)


def aliasing_error_bound(sigma: float) -> float:
    """Spectral bound with the Fourier-pair width 1/(2 pi sigma) of the window.

    Holds for tones with |mu| <= 1/4; decays as exp(-pi^2 sigma^2 / 8).
    """
    if sigma < 1.0 / (4.0 * math.pi):
        raise DomainError(f"aliasing bound needs sigma >= 1/(4 pi), got {sigma}")
    return spectral_constant * math.exp(-math.pi ** 2 * sigma ** 2 / 8.0)


def truncation_error_bound(q: int, sigma: float) -> float:
    """2 exp(-(q+2)^2 / (2 sigma^2))."""
    if q < 0 or not sigma > 0:
        raise InvalidArgumentError(f"truncation bound needs q >= 0 and sigma > 0, got q={q}, sigma={sigma}")
    return 2.0 * math.exp(-(q + 2) ** 2 / (2.0 * sigma ** 2))


def uncertainty_bound_linf(q: int, eps_estimate: float) -> float:
    """eps (3 + (2/pi) log(2q)): worst-case error from samples known within eps."""
    if q < 1:
        raise InvalidArgumentError(f"q must be >= 1, got {q}")
    if eps_estimate < 0:
        raise InvalidArgumentError(f"eps_estimate must be >= 0, got {eps_estimate}")
    return eps_estimate * (3.0 + (2.0 / math.pi) * math.log(2 * q))


def variance_bound(max_variance: float) -> float:
    """(3 + 4/pi^2) max_n sigma_n^2."""
    if max_variance < 0:
        raise InvalidArgumentError(f"max_variance must be >= 0, got {max_variance}")
    return variance_constant * max_variance


def weight_l1_norm(t, q: int) -> np.ndarray:
    """sum_{n=-q}^{q} |sinc(t - n)| for every t."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = np.arange(-q, q + 1)
    return np.abs(sinc(t[:, None] - n[None, :])).sum(axis=1)


def weight_l2_norm(t, q: int) -> np.ndarray:
    """sum_{n=-q}^{q} sinc(t - n)^2 for every t."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = np.arange(-q, q + 1)
    return (sinc(t[:, None] - n[None, :]) ** 2).sum(axis=1)
