#!/usr/bin/env python3
#
#  suzuki.py
#  sincheb
#
#  Suzuki-Trotter product formulas, effective Hamiltonians and the
#  nested-commutator quantity alpha.
#
#  This program is free software; you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation; version 2 of the License.
#
#  See the LICENSE file for more details.

import numpy as np
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial
from sincheb.common.core import CapabilityError, DomainError, InvalidArgumentError, NormalizationError, _get_logger, _log_event, hermitian_tol
from sincheb.linalg.dense import as_matrix, commutator, is_hermitian, matrix_exp, matrix_log, matrix_log_principal, operator_norm
from typing import Dict, List, Sequence, Tuple

logger = _get_logger("trotter")

norm_sum_tol = 1e-12
alpha_max_terms = 6
alpha_max_order = 4


def _log(char: str, msg: str) -> None:
    """Logs an event on the trotter logger."""
    _log_event(logger, char, msg)


@dataclass(frozen=True, eq=False)
class DecomposedHamiltonian:
    """H = sum of Hermitian terms with sum ||H_gamma|| <= 1."""

    terms: Tuple[np.ndarray, ...]
    label: str = ""
    norms: Tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.terms) == 0:
            raise InvalidArgumentError("a decomposed Hamiltonian needs at least one term")
        checked: List[np.ndarray] = []
        for i, term in enumerate(self.terms):
            m = as_matrix(term, f"term {i}")
            if not is_hermitian(m, hermitian_tol):
                raise InvalidArgumentError(f"term {i} of '{self.label}' is not Hermitian within {hermitian_tol:g}")
            if checked and m.shape != checked[0].shape:
                raise InvalidArgumentError(f"term {i} of '{self.label}' has shape {m.shape}, expected {checked[0].shape}")
            m = m.copy()
            m.flags.writeable = False
            checked.append(m)
        norms = tuple(operator_norm(m) for m in checked)
        if sum(norms) > 1.0 + norm_sum_tol:
            raise NormalizationError(f"sum of term norms of '{self.label}' is {sum(norms):.12g} > 1")
        object.__setattr__(self, "terms", tuple(checked))
        object.__setattr__(self, "norms", norms)

    @property
    def m(self) -> int:
        return len(self.terms)

    @property
    def dim(self) -> int:
        return self.terms[0].shape[0]

    @property
    def total(self) -> np.ndarray:
        return sum(self.terms[1:], self.terms[0].copy())

    @property
    def norm_sum(self) -> float:
        return float(sum(self.norms))


@dataclass(frozen=True, eq=False)
class EffectiveHamiltonianResult:
    """H~ = log(S(tau)) / (i tau) and ||H~ - H||."""

    h_tilde: np.ndarray
    tau: complex
    defect_norm: float


def _check_order(order: int) -> int:
    """Accepts p = 1 or an even positive p."""
    p = int(order)
    if p != order or p < 1 or (p != 1 and p % 2 != 0):
        raise InvalidArgumentError(f"formula order must be 1 or a positive even integer, got {order}")
    return p


def suzuki_coefficient(k: int) -> float:
    """u_k = (4 - 4^(1/(2k-1)))^-1."""
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * k - 1)))


def _recursive_stages(m: int, order: int, x: float) -> List[Tuple[int, float]]:
    """Unmerged (term, coefficient) list of S_order(x t) over m terms."""
    if order == 1:
        return [(g, x) for g in range(m)]
    if order == 2:
        return [(g, x / 2) for g in range(m)] + [(g, x / 2) for g in reversed(range(m))]
    u = suzuki_coefficient(order // 2)
    outer = _recursive_stages(m, order - 2, u * x)
    inner = _recursive_stages(m, order - 2, (1 - 4 * u) * x)
    return outer + outer + inner + outer + outer


@lru_cache(maxsize=None)
def stage_plan(m: int, order: int) -> Tuple[Tuple[int, float], ...]:
    """Flat (term index, coefficient) stages of S_order with adjacent equal terms merged."""
    p = _check_order(order)
    merged: List[List] = []
    for g, c in _recursive_stages(m, p, 1.0):
        if merged and merged[-1][0] == g:
            merged[-1][1] += c
        else:
            merged.append([g, c])
    return tuple((g, c) for g, c in merged)


def stage_count(h: DecomposedHamiltonian, order: int) -> int:
    """Number of exponentials in one application of S_order."""
    return len(stage_plan(h.m, order))


def suzuki_formula(h: DecomposedHamiltonian, order: int, t: complex) -> np.ndarray:
    """Returns S_order(t) as the ordered product of single-term exponentials."""
    if abs(t) > np.pi + 1e-12:
        raise DomainError(f"|t| = {abs(t):.12g} exceeds pi; the effective Hamiltonian is not single valued")
    plan = stage_plan(h.m, order)
    cache: Dict[Tuple[int, float], np.ndarray] = {}
    product = np.eye(h.dim, dtype=complex)
    for g, c in plan:
        key = (g, c)
        if key not in cache:
            cache[key] = matrix_exp(1j * c * t * h.terms[g])
        product = product @ cache[key]
    return product


def effective_hamiltonian(h: DecomposedHamiltonian, order: int, tau: complex) -> EffectiveHamiltonianResult:
    """H~(tau) = log(S_order(tau)) / (i tau) and its distance to H."""
    total = h.total
    if tau == 0:
        return EffectiveHamiltonianResult(total, complex(0), 0.0)
    s = suzuki_formula(h, order, tau)
    if complex(tau).imag == 0:
        log_s = matrix_log_principal(s)
    else:
        log_s = matrix_log(s)
    h_tilde = log_s / (1j * tau)
    return EffectiveHamiltonianResult(h_tilde, complex(tau), operator_norm(h_tilde - total))


def loose_alpha_bound(h: DecomposedHamiltonian, order: int) -> float:
    """2^p (sum ||H_gamma||)^(p+1) m, an upper bound on alpha_commutator."""
    p = _check_order(order)
    return float(2 ** p * h.norm_sum ** (p + 1) * h.m)


def _suffix_sum(terms: Sequence[np.ndarray], p: int, states: List[Tuple[np.ndarray, int, float, float]], remaining: Tuple[int, ...], depth: int) -> float:
    """Sums prefix-weighted acomm over every ordered suffix grown from states."""
    m = len(terms)
    full = sum(coef * nrm for _, used, coef, nrm in states if used == p)
    acc = factorial(m - 1 - depth) * factorial(p) * full
    for a in remaining:
        grown: List[Tuple[np.ndarray, int, float, float]] = []
        for x, used, coef, nrm in states:
            grown.append((x, used, coef, nrm))
            y = x
            for q in range(1, p - used + 1):
                y = commutator(terms[a], y)
                if not np.any(np.abs(y) > 1e-15):
                    break
                grown.append((y, used + q, coef / factorial(q), operator_norm(y) if used + q == p else 0.0))
        acc += _suffix_sum(terms, p, grown, tuple(i for i in remaining if i != a), depth + 1)
    return acc


def alpha_commutator(h: DecomposedHamiltonian, order: int) -> float:
    """Multinomial-weighted nested-commutator norm sum, averaged over term orderings.

    For every ordering of the m terms and every position in it, B is the term
    at that position and A_1..A_s are the terms after it; the ordering's
    contribution is sum over q_1+...+q_s = p of (p; q_1..q_s) times
    ||ad_{A_s}^{q_s} ... ad_{A_1}^{q_1}(B)||.
    """
    p = _check_order(order)
    if h.m > alpha_max_terms or p > alpha_max_order:
        raise CapabilityError(f"exact alpha is limited to {alpha_max_terms} terms and order {alpha_max_order}; use loose_alpha_bound = 2^p (sum ||H||)^(p+1) m = {loose_alpha_bound(h, p):.6g}")
    total = 0.0
    for b in range(h.m):
        start = [(h.terms[b], 0, 1.0, 0.0)]
        total += _suffix_sum(h.terms, p, start, tuple(i for i in range(h.m) if i != b), 0)
    alpha = total / factorial(h.m)
    _log("#", f"alpha({h.label or 'H'}, p={p}) = {alpha:.6g}")
    return alpha


def alpha_or_bound(h: DecomposedHamiltonian, order: int) -> float:
    """Exact alpha when enumeration is allowed, otherwise the loose bound."""
    try:
        return alpha_commutator(h, order)
    except CapabilityError as err:
        _log("!", f"{err}")
        return loose_alpha_bound(h, order)


def defect_bound(h: DecomposedHamiltonian, order: int, tau: complex) -> float:
    """Heuristic (5/2) alpha |tau|^p/(p+1)! e^(2|tau| sum||H||); reported, never asserted."""
    p = _check_order(order)
    alpha = alpha_or_bound(h, p)
    return 2.5 * alpha * abs(tau) ** p / factorial(p + 1) * float(np.exp(2 * abs(tau) * h.norm_sum))
