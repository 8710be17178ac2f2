#!/usr/bin/env python3
#
#  noise.py
#  sincheb
#
#  Synthetic-noise studies: complex Gaussian noise on every amplitude sample,
#  reassembly per trial, empirical statistics next to the stability bounds.
#
#  This program is free software; you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation; version 2 of the License.
#
#  See the LICENSE file for more details.

import math
import numpy as np
from dataclasses import dataclass
from sincheb.cheb.extrap import build_cheb_plan, weight_norm
from sincheb.common.core import InvalidArgumentError, _get_logger, _log_event
from sincheb.pipeline.estimator import EvolutionProblem, ParameterChoice, evaluate_node
from sincheb.sinc.query import SincPlan, uncertainty_bound_linf, variance_bound, variance_constant
from typing import Optional

logger = _get_logger("noise")

min_trials = 100
blocksize = 4096


@dataclass(frozen=True)
class NoiseStatistics:
    """Monte-Carlo moments of the noisy estimate and the bounds they are held against.

    std_bound uses the window ratio kappa = max_k w(0)/w(r_k); std_bound_w_min
    is the looser sum_k |d_k| / min_k w(r_k) form. Both scale with sigma_noise.
    """

    trials: int
    sigma_noise: float
    clean_value: complex
    mean: complex
    var_real: float
    var_imag: float
    predicted_variance: float
    variance_bound: float
    linf_bound: float
    std_bound: float
    std_bound_w_min: float

    @property
    def empirical_variance(self) -> float:
        """Larger of the two per-component variances."""
        return max(self.var_real, self.var_imag)

    @property
    def empirical_std(self) -> float:
        return math.sqrt(self.empirical_variance)

    @property
    def passed(self) -> bool:
        """Empirical spread within the bound up to Monte-Carlo error."""
        return self.empirical_std <= self.std_bound * (1.0 + 3.0 / math.sqrt(self.trials))


def _check_inputs(sigma_noise: float, trials: int) -> None:
    """Rejects a negative or non-finite sigma and too few trials."""
    if not sigma_noise >= 0 or not math.isfinite(sigma_noise):
        raise InvalidArgumentError(f"sigma_noise must be finite and >= 0, got {sigma_noise}")
    if int(trials) != trials or trials < min_trials:
        raise InvalidArgumentError(f"trials must be an integer >= {min_trials}, got {trials}")


def _draw_deviations(coeffs: np.ndarray, sigma_noise: float, trials: int, seed: int) -> np.ndarray:
    """coeffs . xi for every trial, xi complex Gaussian per sample.

    Block m draws from its own SeedSequence([seed, m]) so the result does
    not depend on how the trials are split.
    """
    out = np.empty(trials, dtype=complex)
    nblocks = math.ceil(trials / blocksize)
    for m in range(nblocks):
        start = m * blocksize
        size = min(blocksize, trials - start)
        rng = np.random.default_rng(np.random.SeedSequence([seed, m]))
        noise = rng.normal(0.0, sigma_noise, size=(size, coeffs.size)) + 1j * rng.normal(0.0, sigma_noise, size=(size, coeffs.size))
        out[start:start + size] = noise @ coeffs
    return out


def _statistics(deviations: np.ndarray, clean: complex, sigma_noise: float, trials: int, coeffs: np.ndarray, linf_factor: float, std_factor: float, w_min_factor: float) -> NoiseStatistics:
    """Empirical moments of the deviations next to the closed-form bounds scaled by sigma_noise."""
    return NoiseStatistics(
        trials=int(trials),
        sigma_noise=float(sigma_noise),
        clean_value=complex(clean),
        mean=complex(clean + deviations.mean()),
        var_real=float(np.var(deviations.real, ddof=1)),
        var_imag=float(np.var(deviations.imag, ddof=1)),
        predicted_variance=float(sigma_noise ** 2 * np.sum(np.abs(coeffs) ** 2)),
        variance_bound=variance_bound(sigma_noise ** 2),
        linf_bound=linf_factor * sigma_noise,
        std_bound=std_factor * sigma_noise,
        std_bound_w_min=w_min_factor * sigma_noise,
    )


def node_noise_study(plan: SincPlan, sigma_noise: float, trials: int, seed: int, samples: Optional[np.ndarray] = None) -> NoiseStatistics:
    """Noise on one node's 2q+1 samples; statistics of the sinc output times w(r)."""
    _check_inputs(sigma_noise, trials)
    coeffs = np.asarray(plan.window_weights, dtype=float)
    clean_samples = np.zeros(coeffs.size, dtype=complex) if samples is None else np.asarray(samples, dtype=complex)
    if clean_samples.shape != coeffs.shape:
        raise InvalidArgumentError(f"got {clean_samples.size} samples for a plan with {coeffs.size}")
    clean = complex(np.dot(coeffs, clean_samples))
    deviations = _draw_deviations(coeffs.astype(complex), sigma_noise, trials, seed)
    linf = uncertainty_bound_linf(plan.q, 1.0)
    return _statistics(deviations, clean, sigma_noise, trials, coeffs, linf, math.sqrt(variance_constant), math.sqrt(variance_constant))


def noise_study(problem: EvolutionProblem, params: ParameterChoice, sigma_noise: float, trials: int, seed: int) -> NoiseStatistics:
    """Noise on every sample of the (node, offset) grid, reassembled per trial.

    The final estimate is linear in the samples, so each trial is the clean
    estimate plus the noise contracted with d_k times the sinc weights.
    """
    _check_inputs(sigma_noise, trials)
    cheb = build_cheb_plan(params.n)
    evaluations = [evaluate_node(problem, params, float(s)) for s in cheb.nodes]
    coeffs = np.concatenate([d * e.plan.weights for d, e in zip(cheb.weights, evaluations)])
    clean = complex(np.dot(cheb.weights, [e.value for e in evaluations]))
    deviations = _draw_deviations(coeffs.astype(complex), sigma_noise, trials, seed)
    # w(0)/w(r) bounds every window ratio w(o)/w(r) of a node
    kappa = max(math.exp(e.plan.r ** 2 / (2.0 * e.plan.sigma ** 2)) for e in evaluations)
    d_norm = weight_norm(cheb)
    linf = uncertainty_bound_linf(params.q, 1.0) * kappa * d_norm
    w_min = min(e.plan.w_r for e in evaluations)
    stats = _statistics(deviations, clean, sigma_noise, trials, coeffs, linf, d_norm * kappa * math.sqrt(variance_constant), d_norm / w_min * math.sqrt(variance_constant))
    _log_event(logger, "*", f"noise study: {trials} trials, empirical std {stats.empirical_std:.4g}, bound {stats.std_bound:.4g}")
    return stats
