import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitary_homotopy.mats import distance_from_identity, random_hermitian, random_unit_vector
from unitary_homotopy.sampling import projection_instance
from unitary_homotopy.state import (
    AlgebraShape,
    Projection,
    PureState,
    ZeroOverlapError,
    act,
    compress_state,
    corner_isometry,
    excision_defect,
    excision_projections,
    factor_vectors,
    move_distance,
    move_onto_projection,
    overlap,
)


def test_embed_places_operator_on_leading_factors():
    shape = AlgebraShape((2, 3, 2))
    local = np.arange(36).reshape(6, 6)
    assert np.array_equal(shape.embed(local), np.kron(local, np.eye(2)))
    with pytest.raises(ValueError):
        shape.embed(np.eye(5))


def test_pure_state_is_phase_invariant():
    shape = AlgebraShape((2,))
    a = PureState(shape, np.array([0.6, 0.8j]))
    b = PureState(shape, 1j * np.array([0.6, 0.8j]))
    assert np.allclose(a.vector, b.vector)
    z = np.diag([1.0, -1.0])
    assert a(z) == pytest.approx(0.36 - 0.64)


def test_projection_validation():
    shape = AlgebraShape((2,))
    with pytest.raises(ValueError):
        Projection(shape, np.array([[1, 1], [0, 0]]))
    p = Projection(shape, np.diag([1.0, 0.0]))
    assert p.rank == 1 and p.complement().rank == 1


def test_act_rejects_non_unitary():
    psi = PureState.from_vector(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        act(2 * np.eye(2), psi)


def test_move_onto_projection_oracle():
    # psi(P) = 1/4 gives ||1 - U|| = sqrt(2 - 2 * 1/2) = 1.
    shape = AlgebraShape((2,))
    psi = PureState(shape, np.array([0.5, np.sqrt(3) / 2]))
    p = Projection(shape, np.diag([1.0, 0.0]))
    u = move_onto_projection(psi, p)
    assert overlap(act(u, psi), p) == pytest.approx(1.0, abs=1e-15)
    assert distance_from_identity(u) == pytest.approx(1.0, abs=1e-15)
    assert move_distance(psi.vector, p.matrix) == pytest.approx(1.0, abs=1e-15)


def test_move_onto_projection_zero_overlap():
    shape = AlgebraShape((2,))
    with pytest.raises(ZeroOverlapError):
        move_onto_projection(PureState(shape, np.array([0.0, 1.0])), Projection(shape, np.diag([1.0, 0.0])))


def test_move_distance_is_accurate_near_full_weight():
    eps = 1e-12
    psi = np.array([np.sqrt(1 - eps), np.sqrt(eps)])
    p = np.diag([1.0, 0.0])
    # 2 - 2 sqrt(1 - eps) = eps + O(eps^2)
    assert move_distance(psi, p) == pytest.approx(np.sqrt(eps), rel=1e-10)


def test_corner_isometry_for_diagonal_projection():
    iso = corner_isometry(np.diag([0.0, 1.0, 1.0]))
    assert np.array_equal(iso, np.eye(3)[:, 1:])


def test_compress_state_requires_full_weight():
    shape = AlgebraShape((3,))
    p = Projection(shape, np.diag([1.0, 1.0, 0.0]))
    c = compress_state(PureState(shape, np.array([0.6, 0.8, 0.0])), p)
    assert np.allclose(c.state.vector, [0.6, 0.8])
    assert np.allclose(c.expand(np.eye(2)), p.matrix)
    with pytest.raises(ValueError):
        compress_state(PureState(shape, np.array([0.6, 0.0, 0.8])), p)


def test_factor_vectors_reject_entangled_state():
    shape = AlgebraShape((2, 2))
    bell = PureState(shape, np.array([1, 0, 0, 1]) / np.sqrt(2))
    with pytest.raises(ValueError, match="product"):
        factor_vectors(shape, bell)


def test_excision_is_exact_on_local_observables(rng):
    shape = AlgebraShape((2, 3, 2))
    fs = [random_unit_vector(d, rng) for d in shape.factor_dims]
    ref = PureState(shape, np.kron(np.kron(fs[0], fs[1]), fs[2]))
    projs = excision_projections(shape, ref)
    assert [p.rank for p in projs] == [6, 2, 1]
    for n, p in enumerate(projs, 1):
        local = random_hermitian(int(np.prod(shape.factor_dims[:n])), rng)
        assert excision_defect(p, shape.embed(local), ref) < 1e-13
    # An observable on the last factor is not localized by P_1.
    z = shape.embed(np.diag([1.0, -1.0]), first=2)
    assert excision_defect(projs[0], z, ref) > 1e-3 or abs(fs[2][0]) ** 2 == pytest.approx(0.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 16), st.integers(0, 2**32 - 1))
def test_move_onto_projection_identities(d, seed):
    psi, p = projection_instance(d, np.random.default_rng(seed))
    u = move_onto_projection(PureState.from_vector(psi), p)
    assert np.linalg.norm(p.matrix @ u @ psi) ** 2 == pytest.approx(1.0, abs=1e-12)
    assert distance_from_identity(u) == pytest.approx(move_distance(psi, p.matrix), abs=1e-12)
