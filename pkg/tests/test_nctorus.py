import numpy as np
import pytest

from unitary_homotopy.nctorus import (
    BundlePoint,
    RotationAlgebraElement,
    RotationParams,
    clock_shift,
    commutative_homotopy_groups,
    evaluate_element,
    homotopy_groups,
    homotopy_groups_irrational,
    irrep_at,
    pure_state_at,
    relation_residual,
    sphere_table,
)


def test_params_validation():
    with pytest.raises(ValueError, match="coprime"):
        RotationParams(2, 4)
    with pytest.raises(ValueError, match="commutative"):
        RotationParams(0, 1)
    assert RotationParams(2, 3).theta == pytest.approx(2 / 3)


def test_shift_direction():
    _, shift = clock_shift(3)
    assert np.array_equal(shift @ np.eye(3)[0], np.eye(3)[1])


@pytest.mark.parametrize("p,q", [(1, 2), (1, 3), (2, 3), (3, 5), (5, 6)])
def test_relation_on_torus_grid(p, q):
    params = RotationParams(p, q)
    grid = np.exp(2j * np.pi * np.arange(16) / 16)
    assert max(relation_residual(params, a, b) for a in grid for b in grid) <= 1e-12


def test_irrep_rejects_off_circle_points():
    with pytest.raises(ValueError):
        irrep_at(RotationParams(1, 2), 1.1, 1.0)


def test_algebra_operations_match_representation():
    params = RotationParams(2, 5)
    u = RotationAlgebraElement.monomial(params, 1, 0)
    v = RotationAlgebraElement.monomial(params, 0, 1)
    a = u * v + v.scale(0.5j) - RotationAlgebraElement.unit(params)
    z1, z2 = np.exp(0.3j), np.exp(-1.1j)
    ea = evaluate_element(a, z1, z2)
    assert np.allclose(evaluate_element(a * a, z1, z2), ea @ ea, atol=1e-13)
    assert np.allclose(evaluate_element(a.adjoint(), z1, z2), ea.conj().T, atol=1e-13)
    lhs = evaluate_element(v * u, z1, z2)
    rhs = np.exp(-2j * np.pi * params.theta) * evaluate_element(u * v, z1, z2)
    assert np.allclose(lhs, rhs, atol=1e-13)
    assert np.allclose(evaluate_element(a - a, z1, z2), 0.0)


def test_pure_state_is_a_state():
    params = RotationParams(1, 3)
    point = BundlePoint(params, 1.0, np.exp(0.2j), np.array([1, 1j, 0]) / np.sqrt(2))
    state = pure_state_at(point)
    assert state(RotationAlgebraElement.unit(params)) == pytest.approx(1.0)
    a = RotationAlgebraElement.monomial(params, 1, 1, 2.0)
    assert state(a.adjoint() * a).real >= 0
    with pytest.raises(ValueError):
        state(RotationAlgebraElement.unit(RotationParams(1, 2)))


@pytest.mark.parametrize("p,q", [(1, 2), (1, 3), (2, 3), (1, 5)])
def test_homotopy_group_displays(p, q):
    params = RotationParams(p, q)
    values = [homotopy_groups(params, k).value for k in range(2 * q + 1)]
    expected = ["0", "Z^2", "Z"] + ["0"] * (2 * q - 4) + ["Z", f"pi_{2 * q}(S^{2 * q - 1})"]
    assert values == expected


def test_sphere_table_resolution():
    params = RotationParams(1, 2)
    r4 = homotopy_groups(params, 4, resolve=True)
    assert (r4.provenance, r4.resolved) == ("sphere-table", "Z/2")
    assert homotopy_groups(params, 6, resolve=True).resolved == "Z/12"
    r7 = homotopy_groups(params, 7, resolve=True)
    assert (r7.provenance, r7.resolved) == ("symbolic", None)
    assert sphere_table()[(5, 8)] == "Z/24"


def test_irrational_and_commutative_tables():
    assert {homotopy_groups_irrational(k).value for k in range(8)} == {"0"}
    assert [commutative_homotopy_groups(k).value for k in range(4)] == ["0", "Z^2", "0", "0"]
    with pytest.raises(ValueError):
        homotopy_groups(RotationParams(1, 2), -1)
