import numpy as np
import pytest
from conftest import pauli_hamiltonian, random_hermitian, random_unitary
from itertools import permutations
from math import factorial, log2
from sincheb.common.core import CapabilityError, DomainError, InvalidArgumentError, NormalizationError
from sincheb.linalg.dense import commutator, is_hermitian, matrix_exp, operator_norm
from sincheb.trotter.suzuki import DecomposedHamiltonian, alpha_commutator, alpha_or_bound, defect_bound, effective_hamiltonian, loose_alpha_bound, stage_count, stage_plan, suzuki_coefficient, suzuki_formula


def compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def brute_force_alpha(terms, p):
    """Average over orderings of every position's multinomial-weighted nested commutator norms."""
    m = len(terms)
    total = 0.0
    for order in permutations(range(m)):
        for pos, b in enumerate(order):
            later = order[pos + 1:]
            for qs in compositions(p, len(later)):
                x = terms[b]
                for a, q in zip(later, qs):
                    for _ in range(q):
                        x = commutator(terms[a], x)
                weight = factorial(p)
                for q in qs:
                    weight //= factorial(q)
                total += weight * operator_norm(x)
    return total / factorial(m)


@pytest.fixture
def random_pair(rng):
    """Two random 4x4 Hermitian terms of norm 1/2 each."""
    return DecomposedHamiltonian((random_hermitian(rng, 4, 0.5), random_hermitian(rng, 4, 0.5)), label="random")


class TestDecomposedHamiltonian:
    def test_norms(self):
        h = pauli_hamiltonian([(0.4, "XX"), (0.3, "ZI"), (0.3, "IZ")])
        assert h.m == 3
        assert h.dim == 4
        assert np.allclose(h.norms, (0.4, 0.3, 0.3))
        assert h.norm_sum == pytest.approx(1.0)

    def test_norm_sum_above_one(self):
        with pytest.raises(NormalizationError):
            pauli_hamiltonian([(0.7, "X"), (0.5, "Z")])

    def test_non_hermitian_term(self):
        with pytest.raises(InvalidArgumentError):
            DecomposedHamiltonian((np.array([[0, 0.5], [0, 0]]),))

    def test_mixed_shapes(self):
        with pytest.raises(InvalidArgumentError):
            DecomposedHamiltonian((0.1 * np.eye(2), 0.1 * np.eye(4)))

    def test_terms_are_frozen(self):
        h = pauli_hamiltonian([(0.5, "X")])
        with pytest.raises(ValueError):
            h.terms[0][0, 0] = 1.0


class TestStagePlan:
    def test_coefficient(self):
        assert suzuki_coefficient(2) == pytest.approx((4 - 4 ** (1 / 3)) ** -1)

    def test_first_and_second_order(self):
        assert stage_plan(2, 1) == ((0, 1.0), (1, 1.0))
        assert stage_plan(2, 2) == ((0, 0.5), (1, 1.0), (0, 0.5))
        assert stage_plan(3, 2) == ((0, 0.5), (1, 0.5), (2, 1.0), (1, 0.5), (0, 0.5))
        assert stage_plan(1, 2) == ((0, 1.0),)

    def test_fourth_order(self):
        plan = stage_plan(2, 4)
        assert len(plan) == 11
        for g in range(2):
            assert sum(c for i, c in plan if i == g) == pytest.approx(1.0, abs=1e-14)
        assert all(plan[i][0] != plan[i + 1][0] for i in range(len(plan) - 1))

    def test_stage_count(self, xx_zi):
        assert stage_count(xx_zi, 1) == 2
        assert stage_count(xx_zi, 2) == 3
        assert stage_count(xx_zi, 4) == 11

    @pytest.mark.parametrize("order", [0, 3, 5, -2, 2.5])
    def test_invalid_order(self, order):
        with pytest.raises(InvalidArgumentError):
            stage_plan(2, order)


class TestProductFormula:
    @pytest.mark.parametrize("order", [1, 2, 4, 6])
    def test_commuting_terms_exact(self, commuting, order):
        expected = matrix_exp(0.8j * commuting.total)
        assert np.allclose(suzuki_formula(commuting, order, 0.8), expected, atol=1e-13)

    def test_step_above_pi(self, xx_zi):
        with pytest.raises(DomainError):
            suzuki_formula(xx_zi, 2, 3.2)

    def test_symmetric_formula_is_time_reversible(self, random_pair):
        prod = suzuki_formula(random_pair, 2, 0.7) @ suzuki_formula(random_pair, 2, -0.7)
        assert np.allclose(prod, np.eye(4), atol=1e-13)

    @pytest.mark.parametrize("order", [2, 4, 6])
    def test_negative_time_is_adjoint(self, random_pair, order):
        forward = suzuki_formula(random_pair, order, 0.7)
        assert np.allclose(suzuki_formula(random_pair, order, -0.7), forward.conj().T, atol=1e-12)

    def test_first_order_product(self, xx_zi):
        a, b = xx_zi.terms
        expected = matrix_exp(0.4j * a) @ matrix_exp(0.4j * b)
        assert np.allclose(suzuki_formula(xx_zi, 1, 0.4), expected, atol=1e-14)


class TestEffectiveHamiltonian:
    def test_zero_step(self, xx_zi):
        result = effective_hamiltonian(xx_zi, 2, 0.0)
        assert np.allclose(result.h_tilde, xx_zi.total)
        assert result.defect_norm == 0.0

    def test_commuting_has_no_defect(self, commuting):
        assert effective_hamiltonian(commuting, 1, 0.9).defect_norm < 1e-12

    @pytest.mark.parametrize("order", [1, 2, 4])
    def test_measured_order(self, random_pair, order):
        d1 = effective_hamiltonian(random_pair, order, 0.1).defect_norm
        d2 = effective_hamiltonian(random_pair, order, 0.05).defect_norm
        assert abs(log2(d1 / d2) - order) <= 0.5

    @pytest.mark.parametrize("tau", [0.3, -0.6, 1.2])
    def test_real_step_gives_hermitian(self, random_pair, tau):
        h_tilde = effective_hamiltonian(random_pair, 2, tau).h_tilde
        assert is_hermitian(h_tilde, 1e-10)

    def test_defect_bound_is_reported(self, random_pair):
        assert defect_bound(random_pair, 2, 0.1) > 0.0


class TestAlpha:
    def test_pauli_pair_first_order(self):
        h = pauli_hamiltonian([(0.5, "X"), (0.5, "Z")])
        assert alpha_commutator(h, 1) == pytest.approx(0.5)

    def test_anticommuting_pair_second_order(self, xx_zi):
        assert alpha_commutator(xx_zi, 2) == pytest.approx(0.5)

    def test_commuting_is_zero(self, commuting):
        assert alpha_commutator(commuting, 2) == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("order", [1, 2, 4])
    def test_brute_force_oracle(self, rng, order):
        terms = tuple(random_hermitian(rng, 3, 0.3) for _ in range(3))
        h = DecomposedHamiltonian(terms)
        assert alpha_commutator(h, order) == pytest.approx(brute_force_alpha(h.terms, order), rel=1e-10)

    @pytest.mark.parametrize("order", [1, 2])
    def test_below_loose_bound(self, rng, order):
        h = DecomposedHamiltonian(tuple(random_hermitian(rng, 4, 0.25) for _ in range(4)))
        assert alpha_commutator(h, order) <= loose_alpha_bound(h, order)

    @pytest.mark.parametrize("order", [1, 2, 4])
    def test_invariant_under_conjugation(self, xx_zi, rng, order):
        u = random_unitary(rng, 4)
        rotated = DecomposedHamiltonian(tuple(u @ t @ u.conj().T for t in xx_zi.terms))
        assert alpha_commutator(rotated, order) == pytest.approx(alpha_commutator(xx_zi, order), rel=1e-9)

    def test_size_guard(self):
        h = DecomposedHamiltonian(tuple(np.diag([1.0, -1.0]) / 8 for _ in range(7)))
        with pytest.raises(CapabilityError):
            alpha_commutator(h, 1)
        assert alpha_or_bound(h, 1) == pytest.approx(loose_alpha_bound(h, 1))

    def test_order_guard(self, xx_zi):
        with pytest.raises(CapabilityError):
            alpha_commutator(xx_zi, 6)
