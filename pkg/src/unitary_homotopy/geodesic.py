"""Rotations of the unit sphere carrying one unit vector to another.

Inner products are conjugate-linear in the first slot, ``<a, b> = vdot(a, b)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mats import ketbra

NORM_TOL = 1e-12
REAL_TOL = 1e-12
PHASE_TOL = 1e-12


def inner(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(np.vdot(a, b))


def as_state_vector(v, tol: float = NORM_TOL) -> np.ndarray:
    """Validates a unit vector and returns it as a complex 1-d array."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"state vector must be a non-empty 1-d array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("state vector has non-finite entries")
    n = np.linalg.norm(v)
    if abs(n - 1.0) > tol:
        raise ValueError(f"state vector norm {n!r} differs from 1 by more than {tol}")
    return v


def canonical_phase(v: np.ndarray, tol: float = PHASE_TOL) -> np.ndarray:
    """Rotates the first coordinate with magnitude above ``tol`` to the positive reals."""
    v = np.asarray(v, dtype=complex)
    idx = np.flatnonzero(np.abs(v) > tol)
    if idx.size == 0:
        return v.copy()
    c = v[idx[0]]
    out = v * (abs(c) / c)
    out[idx[0]] = abs(c)
    return out


def angle(psi: np.ndarray, omega: np.ndarray) -> float:
    """``arccos Re<psi, omega>``, in [0, pi]."""
    psi, omega = as_state_vector(psi), as_state_vector(omega)
    return float(np.arccos(np.clip(inner(psi, omega).real, -1.0, 1.0)))


@dataclass(frozen=True)
class GeodesicData:
    """Rotation data for a pair with real positive overlap.

    ``unitary`` maps psi to omega, acts on span{psi, companion} and is the
    identity on its orthogonal complement.  ``generator`` is the Hermitian
    ``T`` with ``exp(iT) = unitary`` and norm ``theta``.
    """

    theta: float
    companion: np.ndarray | None
    generator: np.ndarray
    unitary: np.ndarray


def geodesic_unitary(psi: np.ndarray, omega: np.ndarray, real_tol: float = REAL_TOL) -> GeodesicData:
    """Geodesic rotation from ``psi`` to ``omega``.

    Requires ``<psi, omega>`` real (imaginary part at most ``real_tol``) and
    positive.  Equal vectors give the identity with zero generator.

    Raises:
        ValueError: if the overlap is not real or not positive.
    """
    psi, omega = as_state_vector(psi), as_state_vector(omega)
    if psi.shape != omega.shape:
        raise ValueError("vectors have different dimensions")
    c = inner(psi, omega)
    if abs(c.imag) > real_tol:
        raise ValueError(f"overlap {c} is not real within {real_tol}")
    if c.real <= 0.0:
        raise ValueError(f"overlap {c.real} is not positive")
    d = psi.size
    eye = np.eye(d, dtype=complex)
    r = omega - c * psi
    s = float(np.linalg.norm(r))
    # atan2 keeps full relative accuracy for tiny angles, where arccos does not.
    theta = float(np.arctan2(s, c.real))
    if s == 0.0:
        return GeodesicData(0.0, None, np.zeros((d, d), dtype=complex), eye)
    phi = r / s
    # The ``r`` terms avoid dividing by a small ``s`` when psi is close to omega.
    u = (
        eye
        + (np.conj(c) - 1.0) * ketbra(phi, phi)
        + (c - 1.0) * ketbra(psi, psi)
        + ketbra(r, psi)
        - ketbra(psi, r)
    )
    gen = 1j * theta * (ketbra(psi, phi) - ketbra(phi, psi))
    return GeodesicData(theta, phi, gen, u)


def phase_extended_unitary(psi: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Unitary carrying ``psi`` to ``omega`` whenever ``<psi, omega> != 0``.

    The overlap phase ``lam`` is split off as a global scalar, so the result is
    ``lam`` times the geodesic rotation from ``psi`` to ``omega / lam``.
    """
    psi, omega = as_state_vector(psi), as_state_vector(omega)
    c = inner(psi, omega)
    if abs(c) == 0.0:
        raise ValueError("vectors are orthogonal")
    lam = c / abs(c)
    return lam * geodesic_unitary(psi, omega / lam, real_tol=np.inf).unitary


def normalization_gap(psi: np.ndarray, omega: np.ndarray) -> tuple[float, float]:
    """Both sides of ``||psi/|psi| - omega/|omega| ||^2 <= ||psi - omega||^2 / (|psi| |omega|)``."""
    psi = np.asarray(psi, dtype=complex)
    omega = np.asarray(omega, dtype=complex)
    np_, no = np.linalg.norm(psi), np.linalg.norm(omega)
    if np_ == 0.0 or no == 0.0:
        raise ValueError("vectors must be nonzero")
    lhs = float(np.linalg.norm(psi / np_ - omega / no) ** 2)
    rhs = float(np.linalg.norm(psi - omega) ** 2 / (np_ * no))
    return lhs, rhs


def pure_state_norm_distance(psi: np.ndarray, omega: np.ndarray) -> float:
    """Functional-norm distance of the two vector states, ``2 sqrt(1 - |<psi, omega>|^2)``."""
    psi, omega = as_state_vector(psi), as_state_vector(omega)
    c = abs(inner(psi, omega))
    return float(2.0 * np.sqrt(max(0.0, 1.0 - c * c)))
