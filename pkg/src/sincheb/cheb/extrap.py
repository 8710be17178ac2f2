#!/usr/bin/env python3
#
#  extrap.py
#  sincheb
#
#  Chebyshev collocation, extrapolation-to-zero weights and node-count
#  selection for removing the Trotter step from sampled amplitudes.
#
#  This program is free software; you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation; version 2 of the License.
#
#  See the LICENSE file for more details.

import math
import numpy as np
from dataclasses import dataclass
from numpy.polynomial import chebyshev as npcheb
from sincheb.common.core import DomainError, InvalidArgumentError, _get_logger, _log_event
from typing import Sequence

logger = _get_logger("cheb")

default_r_disc = 2.0


@dataclass(frozen=True, eq=False)
class ChebPlan:
    """Chebyshev nodes s_k and the weights d_k that evaluate the interpolant at s = 0."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class NodeBudget:
    """Node count chosen from the Bernstein-ellipse bound, with the inputs that fixed it."""

    n: int
    predicted_error: float
    rho: float
    r_disc: float
    log_c_est: float


def check_node_count(n: int) -> int:
    """Returns n as an int when it is an even integer >= 2."""
    if int(n) != n or n < 2 or int(n) % 2 != 0:
        raise InvalidArgumentError(f"node count must be an even integer >= 2, got {n}")
    return int(n)


def _half_angles(n: int) -> np.ndarray:
    """Angles (n - 2k + 1) pi / (2n) for k = 1..n/2, all in (0, pi/2)."""
    k = np.arange(1, n // 2 + 1)
    return (n - 2 * k + 1) * np.pi / (2 * n)


def cheb_nodes(n: int) -> np.ndarray:
    """s_k = cos((2k-1) pi / (2n)), k = 1..n, mirrored so that s_k = -s_(n+1-k) exactly."""
    n = check_node_count(n)
    half = np.sin(_half_angles(n))
    return np.concatenate([half, -half[::-1]])


def cheb_weights_at_zero(n: int) -> np.ndarray:
    """d_k = (1/n) (-1)^(k + n/2) tan((2k-1) pi / (2n))."""
    n = check_node_count(n)
    a = _half_angles(n)
    k = np.arange(1, n // 2 + 1)
    sign = np.where((k + n // 2) % 2 == 0, 1.0, -1.0)
    # tan((2k-1) pi/(2n)) = cos(a) / sin(a) with a the complementary angle
    half = sign * np.cos(a) / np.sin(a) / n
    return np.concatenate([half, half[::-1]])


def build_cheb_plan(n: int) -> ChebPlan:
    """Read-only nodes and extrapolation weights for n nodes."""
    nodes = cheb_nodes(n)
    weights = cheb_weights_at_zero(n)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return ChebPlan(n=int(n), nodes=nodes, weights=weights)


def weight_norm(plan: ChebPlan) -> float:
    """sum_k |d_k|, the amplification of per-node errors."""
    return float(np.abs(plan.weights).sum())


def chebyshev_basis(s, n: int) -> np.ndarray:
    """Matrix p_j(s_i) of the discretely orthonormal basis sqrt(1/n) T_0, sqrt(2/n) T_j."""
    vander = npcheb.chebvander(np.asarray(s, dtype=float), n - 1)
    scale = np.full(n, math.sqrt(2.0 / n))
    scale[0] = math.sqrt(1.0 / n)
    return vander * scale


def extrapolate_to_zero(samples: Sequence[complex], plan: ChebPlan) -> complex:
    """P_(n-1) f(0) = sum_k d_k f(s_k)."""
    values = np.asarray(samples, dtype=complex)
    if values.shape != (plan.n,):
        raise InvalidArgumentError(f"got {values.size} samples for {plan.n} nodes")
    return complex(np.dot(plan.weights, values))


def bernstein_rho(r_disc: float) -> float:
    """rho = r + sqrt(r^2 - 1)."""
    if r_disc <= 1:
        raise DomainError(f"disc radius must exceed 1, got {r_disc}")
    return r_disc + math.sqrt(r_disc ** 2 - 1.0)


def bernstein_error_bound(c: float, rho: float, n: int) -> float:
    """4 C rho^(-n) / (rho - 1)."""
    if rho <= 1:
        raise DomainError(f"rho must exceed 1, got {rho}")
    if c < 0:
        raise InvalidArgumentError(f"C must be >= 0, got {c}")
    return 4.0 * c * rho ** (-n) / (rho - 1.0)


def bernstein_error_from_log(log_c: float, rho: float, n: int) -> float:
    """bernstein_error_bound(exp(log_c), rho, n) without overflowing for large log C."""
    if rho <= 1:
        raise DomainError(f"rho must exceed 1, got {rho}")
    return math.exp(math.log(4.0) + log_c - n * math.log(rho) - math.log(rho - 1.0))


def choose_n(eps_cheb: float, g: float, order: int, alphas: Sequence[float], ts: Sequence[float], r_disc: float = default_r_disc) -> NodeBudget:
    """Even n with 4 C_est rho^(-n)/(rho-1) <= eps_cheb, C_est = exp(g/(p+1)! sum_j alpha_j t_j (r t_j)^p)."""
    if not eps_cheb > 0:
        raise InvalidArgumentError(f"eps_cheb must be positive, got {eps_cheb}")
    if not g > 0:
        raise InvalidArgumentError(f"g must be positive, got {g}")
    if len(alphas) != len(ts):
        raise InvalidArgumentError(f"{len(alphas)} alphas for {len(ts)} step sizes")
    if any(t > math.pi for t in ts):
        raise DomainError(f"every t_j must be <= pi, got max {max(ts):.6g}")
    rho = bernstein_rho(r_disc)
    p = int(order)
    log_c = g / math.factorial(p + 1) * sum(a * t * (r_disc * t) ** p for a, t in zip(alphas, ts))
    x = (math.log(4.0 / ((rho - 1.0) * eps_cheb)) + log_c) / math.log(rho)
    n = max(2, 2 * math.ceil(x / 2.0))
    predicted = bernstein_error_from_log(log_c, rho, n)
    _log_event(logger, "#", f"choose_n: log C_est = {log_c:.4g}, rho = {rho:.4g}, n = {n}, predicted error = {predicted:.3g}")
    return NodeBudget(n=n, predicted_error=predicted, rho=rho, r_disc=r_disc, log_c_est=log_c)
