import numpy as np
import pytest
from sincheb.cli.problem import pauli_matrix
from sincheb.pipeline.estimator import EvolutionProblem, EvolutionStage
from sincheb.trotter.suzuki import DecomposedHamiltonian


def basis(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng: np.random.Generator, dim: int, norm: float) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (a + a.conj().T) / 2
    return h * (norm / np.linalg.norm(h, 2))


def pauli_hamiltonian(pairs, label: str = "") -> DecomposedHamiltonian:
    """DecomposedHamiltonian from [(coeff, 'XZ'), ...]."""
    return DecomposedHamiltonian(tuple(c * pauli_matrix(s) for c, s in pairs), label=label)


def single_stage(h: DecomposedHamiltonian, t: float, psi1=None, psi2=None) -> EvolutionProblem:
    dim = h.dim
    psi1 = basis(dim, 0) if psi1 is None else psi1
    psi2 = basis(dim, 0) if psi2 is None else psi2
    return EvolutionProblem(stages=(EvolutionStage(v=np.eye(dim), hamiltonian=h, t=t),), psi1=psi1, psi2=psi2)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def xx_zi() -> DecomposedHamiltonian:
    """0.5 XX + 0.5 ZI: two anticommuting terms with alpha = 0.5 at orders 1 and 2."""
    return pauli_hamiltonian([(0.5, "XX"), (0.5, "ZI")], label="xx_zi")


@pytest.fixture
def commuting() -> DecomposedHamiltonian:
    return pauli_hamiltonian([(0.3, "ZI"), (0.4, "ZZ"), (0.2, "IZ")], label="commuting")


@pytest.fixture
def plus_plus() -> np.ndarray:
    return np.full(4, 0.5, dtype=complex)
