#!/usr/bin/env python3
#
#  dense.py
#  sincheb
#
#  Dense complex linear algebra: exponentials, principal logarithms,
#  operator norms and eigendecompositions of Hermitian and unitary matrices.
#
#  This program is free software; you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation; version 2 of the License.
#
#  See the LICENSE file for more details.

import numpy as np
import scipy.linalg as spl
from sincheb.common.core import BranchCutError, InvalidArgumentError, branch_guard, hermitian_tol, log_unitary_tol, max_dim, state_norm_tol, unitary_tol
from typing import Optional, Tuple

direct_power_limit = 64


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validates and returns a finite square complex matrix."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] < 1:
        raise InvalidArgumentError(f"{name} has dimension zero")
    if m.shape[0] > max_dim:
        raise InvalidArgumentError(f"{name} dimension {m.shape[0]} exceeds {max_dim}")
    if not np.all(np.isfinite(m)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    return m


def as_state(v, name: str = "state") -> np.ndarray:
    """Validates and returns a unit-norm complex state vector."""
    s = np.asarray(v, dtype=complex)
    if s.ndim != 1 or s.shape[0] < 1:
        raise InvalidArgumentError(f"{name} must be a non-empty vector, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise InvalidArgumentError(f"{name} has non-finite entries")
    norm = np.linalg.norm(s)
    if abs(norm - 1.0) > state_norm_tol:
        raise InvalidArgumentError(f"{name} has norm {norm:.15g}, expected 1")
    return s


def is_hermitian(a: np.ndarray, tol: float = hermitian_tol) -> bool:
    """Checks A = A^dagger entrywise within tol."""
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def is_unitary(a: np.ndarray, tol: float = unitary_tol) -> bool:
    """Checks A^dagger A = I entrywise within tol."""
    return bool(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))) <= tol)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Returns [A, B] = AB - BA."""
    return a @ b - b @ a


def matrix_exp(a) -> np.ndarray:
    """Returns exp(A).

    (Anti-)Hermitian generators go through eigh so the result keeps its
    structure exactly; anything else uses scaling and squaring.
    """
    m = as_matrix(a)
    exact = 1e-14 * max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m + m.conj().T)) <= exact:
        w, q = spl.eigh(-1j * m)
        return (q * np.exp(1j * w)) @ q.conj().T
    if np.max(np.abs(m - m.conj().T)) <= exact:
        w, q = spl.eigh(m)
        return (q * np.exp(w)) @ q.conj().T
    return spl.expm(m)


def power_decomposition(u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (eigenvalues, Z) with U = Z diag(eigenvalues) Z^dagger for a normal U."""
    t, z = spl.schur(u, output="complex")
    return np.diag(t).copy(), z


def _check_branch(phases: np.ndarray) -> None:
    """Raises when a phase sits within branch_guard of +-pi."""
    gap = np.pi - np.abs(phases)
    worst = int(np.argmin(gap))
    if gap[worst] < branch_guard:
        raise BranchCutError(float(phases[worst]))


def matrix_log_principal(u) -> np.ndarray:
    """Returns the principal logarithm of a unitary through its Schur form."""
    m = as_matrix(u, "unitary")
    if not is_unitary(m, log_unitary_tol):
        raise InvalidArgumentError(f"matrix is not unitary within {log_unitary_tol:g}")
    lam, z = power_decomposition(m)
    phases = np.angle(lam)
    _check_branch(phases)
    return (z * (1j * phases)) @ z.conj().T


def matrix_log(a) -> np.ndarray:
    """Principal logarithm of any matrix; unitaries take the Schur path."""
    m = as_matrix(a)
    if is_unitary(m, log_unitary_tol):
        return matrix_log_principal(m)
    _check_branch(np.angle(np.linalg.eigvals(m)))
    return spl.logm(m)


def operator_norm(a) -> float:
    """Largest singular value."""
    return float(spl.svdvals(as_matrix(a))[0])


def eig_hermitian(a) -> Tuple[np.ndarray, np.ndarray]:
    """Returns ascending eigenvalues and a unitary eigenvector matrix of a Hermitian A."""
    m = as_matrix(a)
    if not is_hermitian(m, hermitian_tol):
        raise InvalidArgumentError(f"matrix is not Hermitian within {hermitian_tol:g}")
    w, q = spl.eigh(m)
    return w, q


def unitary_power(u: np.ndarray, k: int, decomposition: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> np.ndarray:
    """Integer power of a unitary; negative k goes through U^dagger.

    Powers up to direct_power_limit use repeated squaring, larger ones the
    Schur eigendecomposition (pass a cached one to skip recomputing it).
    """
    k = int(k)
    if abs(k) <= direct_power_limit:
        base = u if k >= 0 else u.conj().T
        return np.linalg.matrix_power(base, abs(k))
    lam, z = decomposition if decomposition is not None else power_decomposition(u)
    return (z * lam ** k) @ z.conj().T


def fractional_power(u, x: float) -> np.ndarray:
    """Principal-branch U^x of a unitary."""
    m = as_matrix(u, "unitary")
    lam, z = power_decomposition(m)
    phases = np.angle(lam)
    _check_branch(phases)
    return (z * np.exp(1j * x * phases)) @ z.conj().T
