"""Dense complex matrix kernel: exponentials and principal logarithms of unitaries."""

from __future__ import annotations

import numpy as np
import scipy.linalg

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
BRANCH_GUARD = 1e-8


class BranchCutError(ValueError):
    """Raised when a unitary has an eigenvalue too close to -1 for the principal log."""


def _square(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value of ``m``."""
    m = np.asarray(m, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def distance_from_identity(u: np.ndarray) -> float:
    u = np.asarray(u, dtype=complex)
    return operator_norm(np.eye(u.shape[0]) - u)


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a, dtype=complex)
    return operator_norm(a - dagger(a)) <= tol * (1.0 + operator_norm(a))


def unitarity_defect(u: np.ndarray) -> float:
    u = np.asarray(u, dtype=complex)
    return operator_norm(u @ dagger(u) - np.eye(u.shape[0]))


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(u) <= tol


def ketbra(ket: np.ndarray, bra: np.ndarray) -> np.ndarray:
    """The rank-one operator ``x -> <bra, x> ket``."""
    return np.outer(ket, np.conj(bra))


def unitary_exp(a: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Returns ``exp(iA)`` for a Hermitian matrix ``A``.

    Args:
        a: Hermitian matrix.
        tol: relative Hermiticity tolerance.

    Raises:
        ValueError: if ``a`` is not square or not Hermitian within ``tol``.
    """
    a = _square(a, "generator")
    if not is_hermitian(a, tol):
        raise ValueError("generator is not Hermitian within tolerance")
    h = 0.5 * (a + dagger(a))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)) @ dagger(v)


def unitary_eig(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and an orthonormal eigenbasis of a unitary via complex Schur form."""
    t, z = scipy.linalg.schur(u, output="complex")
    return np.diag(t).copy(), z


def principal_log_unitary(
    u: np.ndarray, unitary_tol: float = UNITARY_TOL, guard: float = BRANCH_GUARD
) -> np.ndarray:
    """Returns the Hermitian ``A = -i Log U`` with eigenvalue phases in (-pi, pi).

    Args:
        u: unitary matrix.
        unitary_tol: allowed unitarity defect.
        guard: eigenvalues within this distance of -1 are rejected.

    Raises:
        ValueError: if ``u`` is not unitary within tolerance.
        BranchCutError: if an eigenvalue lies within ``guard`` of -1.
    """
    u = _square(u, "unitary")
    if not is_unitary(u, unitary_tol):
        raise ValueError("matrix is not unitary within tolerance")
    lam, z = unitary_eig(u)
    near = np.abs(lam + 1.0)
    if np.any(near <= guard):
        raise BranchCutError(f"eigenvalue within {near.min():.3e} of -1")
    phases = np.angle(lam / np.abs(lam))
    a = (z * phases) @ dagger(z)
    return 0.5 * (a + dagger(a))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_hermitian(d: int, rng: np.random.Generator, norm: float | None = None) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (z + dagger(z))
    if norm is not None:
        h *= norm / operator_norm(h)
    return h


def random_unit_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def unitary_exp_path(a: np.ndarray, scalars, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Stack of ``exp(i c A)`` for each ``c`` in ``scalars``, sharing one eigensolve."""
    a = _square(a, "generator")
    if not is_hermitian(a, tol):
        raise ValueError("generator is not Hermitian within tolerance")
    w, v = np.linalg.eigh(0.5 * (a + dagger(a)))
    c = np.asarray(scalars, dtype=float)
    phases = np.exp(1j * np.multiply.outer(c, w))
    return np.einsum("ij,tj,kj->tik", v, phases, v.conj())
