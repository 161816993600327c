import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitary_homotopy.geodesic import (
    angle,
    as_state_vector,
    canonical_phase,
    geodesic_unitary,
    normalization_gap,
    phase_extended_unitary,
    pure_state_norm_distance,
)
from unitary_homotopy.mats import distance_from_identity, random_unit_vector, unitarity_defect
from unitary_homotopy.sampling import positive_pair


def test_real_plane_rotation():
    a = 0.7
    psi = np.array([1, 0, 0], dtype=complex)
    omega = np.array([np.cos(a), np.sin(a), 0], dtype=complex)
    g = geodesic_unitary(psi, omega)
    expected = np.array([[np.cos(a), -np.sin(a), 0], [np.sin(a), np.cos(a), 0], [0, 0, 1]])
    assert g.theta == pytest.approx(a, abs=1e-15)
    assert np.allclose(g.unitary, expected, atol=1e-15)
    assert np.allclose(g.companion, [0, 1, 0], atol=1e-15)


def test_equal_vectors_give_identity():
    psi = np.array([0.6, 0.8j])
    g = geodesic_unitary(psi, psi)
    assert g.theta == 0.0
    assert np.allclose(g.unitary, np.eye(2))


def test_tiny_angle_is_accurate():
    eps = 3e-9
    psi = np.array([1, 0], dtype=complex)
    omega = np.array([np.cos(eps), np.sin(eps)], dtype=complex)
    g = geodesic_unitary(psi, omega)
    assert g.theta == pytest.approx(eps, rel=1e-12)
    assert np.linalg.norm(g.unitary @ psi - omega) < 1e-16


def test_rejects_complex_overlap():
    with pytest.raises(ValueError):
        geodesic_unitary(np.array([1, 0], dtype=complex), np.array([1j, 1]) / np.sqrt(2))


def test_rejects_non_unit_vector():
    with pytest.raises(ValueError):
        as_state_vector(np.array([1.0, 1.0]))


def test_phase_extension_handles_complex_overlap(rng):
    psi, omega = random_unit_vector(5, rng), random_unit_vector(5, rng)
    v = phase_extended_unitary(psi, omega)
    assert np.linalg.norm(v @ psi - omega) < 1e-12
    assert unitarity_defect(v) < 1e-12


def test_canonical_phase_is_idempotent(rng):
    v = canonical_phase(random_unit_vector(4, rng))
    assert np.allclose(canonical_phase(v), v, atol=1e-15)
    assert v[0].imag == 0.0 and v[0].real > 0


def test_angle_and_norm_distance_oracle():
    psi = np.array([1, 0], dtype=complex)
    omega = np.array([np.cos(0.4), 1j * np.sin(0.4)])
    assert angle(psi, omega) == pytest.approx(0.4)
    assert pure_state_norm_distance(psi, omega) == pytest.approx(2 * np.sin(0.4))
    assert pure_state_norm_distance(psi, 1j * psi) == pytest.approx(0.0, abs=1e-15)


def test_normalization_gap(rng):
    psi, omega = positive_pair(6, rng)
    lhs, rhs = normalization_gap(psi, omega)
    assert lhs == pytest.approx(rhs, rel=1e-14)
    lhs, rhs = normalization_gap(3 * psi, 0.5 * omega)
    assert lhs <= rhs


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 16), st.integers(0, 2**32 - 1))
def test_geodesic_identities(d, seed):
    psi, omega = positive_pair(d, np.random.default_rng(seed))
    g = geodesic_unitary(psi, omega)
    v = g.unitary
    assert np.linalg.norm(v @ psi - omega) < 1e-12
    assert unitarity_defect(v) < 1e-12
    assert distance_from_identity(v) == pytest.approx(np.linalg.norm(psi - omega), abs=1e-12)
    lam = np.linalg.eigvals(v)
    allowed = np.exp(1j * np.array([g.theta, -g.theta, 0.0]))
    assert np.min(np.abs(lam[:, None] - allowed[None]), axis=1).max() < 1e-10
