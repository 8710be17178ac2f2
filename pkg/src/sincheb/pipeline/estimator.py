#!/usr/bin/env python3
#
#  estimator.py
#  sincheb
#
#  End-to-end estimate of <psi1| V_1 e^(i T_1 H_1) ... V_M e^(i T_M H_M) |psi2>:
#  parameter selection, the exact amplitude oracle, product-formula sampling
#  on the (node, offset) grid, sinc + Chebyshev assembly and query accounting.
#
#  This program is free software; you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation; version 2 of the License.
#
#  See the LICENSE file for more details.

import math
import numpy as np
from dataclasses import dataclass, field, replace
from sincheb.cheb.extrap import ChebPlan, bernstein_error_from_log, build_cheb_plan, check_node_count, choose_n, default_r_disc, extrapolate_to_zero, weight_norm
from sincheb.common.core import InvalidArgumentError, _get_logger, _log_event, unitary_tol
from sincheb.linalg.dense import as_matrix, as_state, direct_power_limit, eig_hermitian, is_unitary, power_decomposition, unitary_power
from sincheb.sinc.query import AmplitudeSeries, SincPlan, build_sinc_plan, choose_q, interp_error_bound, interp_safety_factor, sinc_estimate
from sincheb.trotter.suzuki import DecomposedHamiltonian, _check_order, alpha_or_bound, stage_count, suzuki_formula
from typing import List, Optional, Sequence, Tuple

logger = _get_logger("pipeline")

n_cap = 64
step_budget = math.pi / 2


def _log(char: str, msg: str) -> None:
    """Logs an event on the pipeline logger."""
    _log_event(logger, char, msg)


@dataclass(frozen=True, eq=False)
class EvolutionStage:
    """One factor V e^(i T H) of the evolution."""

    v: np.ndarray
    hamiltonian: DecomposedHamiltonian
    t: float

    def __post_init__(self) -> None:
        v = as_matrix(self.v, "V")
        if not is_unitary(v, unitary_tol):
            raise InvalidArgumentError(f"V is not unitary within {unitary_tol:g}")
        if v.shape[0] != self.hamiltonian.dim:
            raise InvalidArgumentError(f"V has dimension {v.shape[0]}, H has {self.hamiltonian.dim}")
        if not math.isfinite(self.t) or self.t < 0:
            raise InvalidArgumentError(f"evolution time must be finite and >= 0, got {self.t}")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "t", float(self.t))


@dataclass(frozen=True, eq=False)
class EvolutionProblem:
    """Ordered stages between the bra psi1 and the ket psi2."""

    stages: Tuple[EvolutionStage, ...]
    psi1: np.ndarray
    psi2: np.ndarray

    def __post_init__(self) -> None:
        if len(self.stages) == 0:
            raise InvalidArgumentError("an evolution problem needs at least one stage")
        dims = {s.hamiltonian.dim for s in self.stages}
        if len(dims) != 1:
            raise InvalidArgumentError(f"stages have mixed dimensions {sorted(dims)}")
        dim = dims.pop()
        psi1 = as_state(self.psi1, "psi1")
        psi2 = as_state(self.psi2, "psi2")
        for name, psi in (("psi1", psi1), ("psi2", psi2)):
            if psi.shape[0] != dim:
                raise InvalidArgumentError(f"{name} has dimension {psi.shape[0]}, stages have {dim}")
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "psi1", psi1)
        object.__setattr__(self, "psi2", psi2)

    @property
    def m(self) -> int:
        return len(self.stages)

    @property
    def dim(self) -> int:
        return self.psi1.shape[0]

    @property
    def times(self) -> Tuple[float, ...]:
        return tuple(s.t for s in self.stages)


@dataclass(frozen=True)
class ParameterOverrides:
    """Values that replace the automatic choice of p, g, n or q."""

    p: Optional[int] = None
    g: Optional[int] = None
    n: Optional[int] = None
    q: Optional[int] = None


@dataclass(frozen=True)
class ParameterChoice:
    """Resolved p, g, n, q with the quantities they were derived from."""

    p: int
    g: int
    n: int
    q: int
    t_js: Tuple[float, ...]
    alphas: Tuple[float, ...]
    alpha_max: float
    T_max: float
    eps: float
    eps_cheb: float
    eps_sinc: float
    fallback_g: bool
    r_disc: float
    log_c_est: float
    rho: float

    @property
    def predicted_cheb_error(self) -> float:
        return bernstein_error_from_log(self.log_c_est, self.rho, self.n)


@dataclass(frozen=True)
class EstimateOptions:
    """Knobs of full_estimate beyond eps."""

    adaptive: bool = False
    overrides: ParameterOverrides = field(default_factory=ParameterOverrides)
    r_disc: float = default_r_disc
    compute_exact: bool = True


class QueryCounter:
    """Running total of product-formula stage applications and the deepest single circuit."""

    def __init__(self) -> None:
        self.total = 0
        self.max_depth = 0
        self.negative_samples = 0

    def add(self, stage_costs: Sequence[int], power: int) -> None:
        depth = sum(stage_costs) * abs(power)
        self.total += depth
        self.max_depth = max(self.max_depth, depth)
        if power < 0:
            self.negative_samples += 1


@dataclass(frozen=True, eq=False)
class NodeEvaluation:
    """Samples and sinc estimate of one Chebyshev node."""

    node: float
    plan: SincPlan
    series: AmplitudeSeries
    value: complex


@dataclass(frozen=True, eq=False)
class EstimateReport:
    """Estimate, ground truth, cost and the parameters that produced them."""

    value: complex
    exact_value: Optional[complex]
    algorithmic_error_budget: Tuple[float, float]
    query_count: int
    max_depth: int
    parameters: ParameterChoice
    converged: Optional[bool]
    fallback_g: bool
    rounds: Tuple[Tuple[int, complex], ...]
    node_values: Tuple[complex, ...]
    negative_power_samples: int
    sinc_error_bound: float
    cheb_error_bound: float

    @property
    def error(self) -> Optional[float]:
        if self.exact_value is None:
            return None
        return abs(self.value - self.exact_value)


def stage_counts(problem: EvolutionProblem, order: int) -> Tuple[int, ...]:
    """Exponentials per application of S_order for every stage."""
    return tuple(stage_count(s.hamiltonian, order) for s in problem.stages)


def _nearest_order(x: float) -> int:
    """Nearest admissible order (1 or even) to a real x."""
    if x <= 1.5:
        return 1
    return max(2, 2 * round(x / 2.0))


def _check_eps(eps: float) -> None:
    """Rejects eps outside (0, 1)."""
    if not 0 < eps < 1:
        raise InvalidArgumentError(f"eps must lie in (0, 1), got {eps}")


def choose_parameters(problem: EvolutionProblem, eps: float, overrides: Optional[ParameterOverrides] = None, r_disc: float = default_r_disc) -> ParameterChoice:
    """Picks p, g, n and q for a total algorithmic error eps split evenly between the two stages."""
    _check_eps(eps)
    ov = overrides or ParameterOverrides()
    m = problem.m
    times = problem.times
    t_max = max(times)
    log_inv_eps = math.log(1.0 / eps)

    if ov.p is not None:
        p = _check_order(ov.p)
    elif m * t_max <= log_inv_eps:
        p = 1
    else:
        p = _nearest_order(math.sqrt(math.log(m * t_max / log_inv_eps) / math.log(5.0)))

    alphas = tuple(alpha_or_bound(s.hamiltonian, p) for s in problem.stages)
    alpha_max = max(alphas)
    eps_cheb = eps_sinc = eps / 2.0

    g_floor = max(1, math.ceil(sum(times) / step_budget))
    if ov.g is not None:
        g = int(ov.g)
        if g != ov.g or g < 1:
            raise InvalidArgumentError(f"g must be a positive integer, got {ov.g}")
        if sum(times) / g > step_budget:
            raise InvalidArgumentError(f"g = {g} gives sum t_j = {sum(times) / g:.6g} > pi/2")
        fallback = False
    else:
        core = (p - 1) * m * alpha_max * t_max ** (p + 1) / (math.factorial(p + 1) * math.log(1.0 / eps_cheb))
        g_formula = math.ceil(r_disc * core ** (1.0 / p)) if core > 0 else 0
        fallback = g_formula == 0
        if fallback:
            _log("!", f"g formula degenerates (alpha_max = {alpha_max:g}, p = {p}); using the step constraint alone, g = {g_floor}")
        g = max(1, g_formula, g_floor)

    t_js = tuple(t / g for t in times)
    q = choose_q(eps_sinc) if ov.q is None else int(ov.q)
    if q < 1:
        raise InvalidArgumentError(f"q must be >= 1, got {ov.q}")
    budget = choose_n(eps_cheb, g, p, alphas, t_js, r_disc)
    n = budget.n if ov.n is None else check_node_count(ov.n)

    choice = ParameterChoice(p=p, g=g, n=n, q=q, t_js=t_js, alphas=alphas, alpha_max=alpha_max, T_max=t_max, eps=eps, eps_cheb=eps_cheb, eps_sinc=eps_sinc, fallback_g=fallback, r_disc=r_disc, log_c_est=budget.log_c_est, rho=budget.rho)
    _log("#", f"parameters: p={p} g={g} n={n} q={q} alpha_max={alpha_max:.6g} T_max={t_max:.6g}")
    return choice


def _amplitude(problem: EvolutionProblem, factors: Sequence[np.ndarray]) -> complex:
    """<psi1| V_1 F_1 ... V_M F_M |psi2>, applied right to left on the ket."""
    vec = problem.psi2
    for stage, f in zip(reversed(problem.stages), reversed(factors)):
        vec = stage.v @ (f @ vec)
    return complex(np.vdot(problem.psi1, vec))


def exact_amplitude(problem: EvolutionProblem) -> complex:
    """Ground truth through the eigendecomposition of every stage Hamiltonian."""
    factors = []
    for stage in problem.stages:
        w, q = eig_hermitian(stage.hamiltonian.total)
        factors.append((q * np.exp(1j * stage.t * w)) @ q.conj().T)
    return _amplitude(problem, factors)


class _NodeOperators:
    """S_(p,j)(s t_j) of every stage at one node, with lazily cached Schur forms."""

    def __init__(self, problem: EvolutionProblem, params: ParameterChoice, node: float) -> None:
        self.problem = problem
        self.unitaries = [suzuki_formula(s.hamiltonian, params.p, node * t) for s, t in zip(problem.stages, params.t_js)]
        self.costs = stage_counts(problem, params.p)
        self._schur: List[Optional[Tuple[np.ndarray, np.ndarray]]] = [None] * len(self.unitaries)

    def _decomposition(self, j: int) -> Tuple[np.ndarray, np.ndarray]:
        if self._schur[j] is None:
            self._schur[j] = power_decomposition(self.unitaries[j])
        return self._schur[j]

    def sample(self, power: int, counter: Optional[QueryCounter] = None) -> complex:
        factors = []
        for j, u in enumerate(self.unitaries):
            dec = self._decomposition(j) if abs(power) > direct_power_limit else None
            factors.append(unitary_power(u, power, dec))
        if counter is not None:
            counter.add(self.costs, power)
        return _amplitude(self.problem, factors)


def sample_amplitude(problem: EvolutionProblem, params: ParameterChoice, k: int, o: int, counter: Optional[QueryCounter] = None, plan: Optional[ChebPlan] = None) -> complex:
    """Amplitude with every stage replaced by S_(p,j)(s_k t_j)^(m_k + o); k is 0-based."""
    plan = plan or build_cheb_plan(params.n)
    if not 0 <= k < plan.n:
        raise InvalidArgumentError(f"node index {k} outside 0..{plan.n - 1}")
    if abs(o) > params.q:
        raise InvalidArgumentError(f"offset {o} outside -{params.q}..{params.q}")
    node = float(plan.nodes[k])
    m_k = math.floor(params.g / node)
    return _NodeOperators(problem, params, node).sample(m_k + o, counter)


def evaluate_node(problem: EvolutionProblem, params: ParameterChoice, node: float, counter: Optional[QueryCounter] = None) -> NodeEvaluation:
    """All 2q+1 samples of one node from a single product-formula build, and their sinc estimate."""
    ops = _NodeOperators(problem, params, node)
    plan = build_sinc_plan(params.q, params.g / node)
    samples = np.array([ops.sample(plan.m + int(o), counter) for o in plan.offsets], dtype=complex)
    if plan.m - plan.q < 0:
        _log("#", f"node {node:.6g}: powers down to {plan.m - plan.q} sampled through S^dagger")
    series = AmplitudeSeries(base_power=plan.m, samples=samples)
    return NodeEvaluation(node=node, plan=plan, series=series, value=sinc_estimate(series, plan))


def predicted_query_count(problem: EvolutionProblem, params: ParameterChoice) -> Tuple[int, int]:
    """(query_count, max_depth) from the node grid alone, without sampling."""
    nodes = build_cheb_plan(params.n).nodes
    m = np.array([math.floor(params.g / s) for s in nodes], dtype=np.int64)
    offsets = np.arange(-params.q, params.q + 1, dtype=np.int64)
    depth = sum(stage_counts(problem, params.p)) * np.abs(m[:, None] + offsets[None, :])
    return int(depth.sum()), int(depth.max())


def _estimate_once(problem: EvolutionProblem, params: ParameterChoice, counter: QueryCounter) -> Tuple[complex, List[NodeEvaluation], ChebPlan]:
    """Samples every node once and extrapolates the sinc estimates to zero step."""
    plan = build_cheb_plan(params.n)
    evaluations = [evaluate_node(problem, params, float(s), counter) for s in plan.nodes]
    value = extrapolate_to_zero([e.value for e in evaluations], plan)
    return value, evaluations, plan


def full_estimate(problem: EvolutionProblem, eps: float, options: Optional[EstimateOptions] = None) -> EstimateReport:
    """Sinc fractional queries at every Chebyshev node, extrapolated to zero step.

    With options.adaptive the node count doubles until two successive
    estimates differ by less than eps/4 or n would exceed n_cap; the query
    count then covers every round.
    """
    options = options or EstimateOptions()
    params = choose_parameters(problem, eps, options.overrides, options.r_disc)
    counter = QueryCounter()
    value, evaluations, plan = _estimate_once(problem, params, counter)
    rounds = [(params.n, value)]
    converged: Optional[bool] = None
    if options.adaptive:
        converged = False
        while 2 * params.n <= n_cap:
            params = replace(params, n=2 * params.n)
            new_value, evaluations, plan = _estimate_once(problem, params, counter)
            rounds.append((params.n, new_value))
            delta = abs(new_value - value)
            value = new_value
            _log("#", f"adaptive n = {params.n}: |change| = {delta:.3g}")
            if delta < eps / 4.0:
                converged = True
                break
        if not converged:
            _log("!", f"adaptive node doubling did not settle below {eps / 4.0:.3g} by n = {params.n}")

    exact = exact_amplitude(problem) if options.compute_exact else None
    report = EstimateReport(
        value=value,
        exact_value=exact,
        algorithmic_error_budget=(params.eps_cheb, params.eps_sinc),
        query_count=counter.total,
        max_depth=counter.max_depth,
        parameters=params,
        converged=converged,
        fallback_g=params.fallback_g,
        rounds=tuple(rounds),
        node_values=tuple(e.value for e in evaluations),
        negative_power_samples=counter.negative_samples,
        sinc_error_bound=interp_safety_factor * interp_error_bound(params.q) * weight_norm(plan),
        cheb_error_bound=params.predicted_cheb_error,
    )
    _log("*", f"estimate {value:.12g} after {counter.total} stage applications (max depth {counter.max_depth})")
    return report
