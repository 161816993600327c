import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitary_homotopy.contract import bloch_sphere_family
from unitary_homotopy.geodesic import geodesic_unitary
from unitary_homotopy.homotopy import (
    Obstruction,
    PreconditionError,
    RSet,
    SBall,
    SubdivisionNeeded,
    UnitaryFamily,
    UnitaryPath,
    concatenate,
    contract_in_r,
    contract_in_s,
    corner_align,
    deform_to_geodesic,
    find_unhit_point,
    lift_path,
    padded_sphere_contraction,
    sphere_rank_condition,
)
from unitary_homotopy.mats import distance_from_identity, operator_norm, random_unit_vector, unitary_exp
from unitary_homotopy.sampling import corner_instance, r_family, s_ball_circle, z_instance
from unitary_homotopy.state import AlgebraShape, Projection

DELTA = 5e-4
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def test_deform_to_geodesic_oracle_on_diagonal_unitary():
    # U fixes e_1, so the geodesic end point is the identity.
    u = np.diag(np.exp(1j * np.array([0.0, 0.3, -0.2])))
    path = deform_to_geodesic(u, np.array([1, 0, 0], dtype=complex), grid=5)
    assert np.allclose(path.end, np.eye(3), atol=1e-15)
    assert np.allclose(path.unitaries[2], np.diag(np.exp(1j * np.array([0.0, 0.15, -0.1]))), atol=1e-15)


def test_deform_to_geodesic_preconditions():
    u = np.diag([1.0, -1.0]).astype(complex)
    with pytest.raises(PreconditionError) as info:
        deform_to_geodesic(u, np.array([0, 1], dtype=complex))
    assert len(info.value.violations) == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_deform_to_geodesic_properties(seed):
    psi, u = z_instance(6, np.random.default_rng(seed))
    path = deform_to_geodesic(u, psi)
    assert np.allclose(path.start, u, atol=1e-14)
    assert np.allclose(path.end, geodesic_unitary(psi, u @ psi).unitary, atol=1e-12)
    assert max(np.linalg.norm(x @ psi - u @ psi) for x in path.unitaries) < 1e-12
    assert path.max_dist_from_identity <= 3 * distance_from_identity(u) + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_corner_align_properties(seed):
    u, p, psi, gamma, delta = corner_instance(8, 3, np.random.default_rng(seed))
    path = corner_align(u, p, psi, gamma, delta)
    q = np.eye(8) - p
    npu = np.linalg.norm(p @ u @ psi)
    target = npu * p @ psi / np.linalg.norm(p @ psi)
    assert max(operator_norm(q @ x - q @ u) for x in path.unitaries) < 1e-12
    assert max(abs(np.linalg.norm(p @ x @ psi) - npu) for x in path.unitaries) < 1e-12
    assert np.linalg.norm(p @ path.end @ psi - target) < 1e-10
    assert path.max_dist_from_identity <= path.meta["bound"] + 1e-12


def test_corner_align_lists_failed_hypotheses():
    p = np.diag([1.0, 0.0, 0.0])
    psi = np.array([0.6, 0.8, 0.0], dtype=complex)
    with pytest.raises(PreconditionError) as info:
        corner_align(np.eye(3), p, psi, gamma=0.9, delta=1.5)
    assert any("gamma" in v for v in info.value.violations)


def test_padded_sphere_end_points_and_denominator():
    om = np.array([0.6, 0.8j])
    mid, den = padded_sphere_contraction(om, 1, 0.5, return_denominator=True)
    assert den == pytest.approx(1 / np.sqrt(2))
    end = padded_sphere_contraction(om, 1, 1.0)
    assert np.allclose(end, [0, 0, 0.6, 0.8j])
    assert np.allclose(padded_sphere_contraction(end, 2, 1.0), [1, 0, 0, 0])
    with pytest.raises(ValueError):
        padded_sphere_contraction(om, 2, 0.5)


def test_lift_path_tracks_samples(rng):
    ys = [random_unit_vector(4, rng)]
    for _ in range(6):
        z = ys[-1] + 0.3 * random_unit_vector(4, rng)
        ys.append(z / np.linalg.norm(z))
    lifted = lift_path(ys, np.eye(4), ys[0])
    for v, y in zip(lifted.unitaries, ys):
        assert np.linalg.norm(v @ ys[0] - y) < 1e-12


def test_lift_path_asks_for_subdivision():
    ys = [np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)]
    with pytest.raises(SubdivisionNeeded) as info:
        lift_path(ys, np.eye(2), ys[0])
    assert info.value.index == 0


def test_concatenate_checks_joins():
    a = UnitaryPath.from_samples([0, 1], [np.eye(2), np.eye(2)])
    b = UnitaryPath.from_samples([0, 1], [SZ, SZ])
    with pytest.raises(ValueError, match="does not start"):
        concatenate([a, b])
    both = concatenate([a, a])
    assert both.times.tolist() == [0.0, 0.5, 1.0]


def test_sphere_rank_condition_and_unhit_point(rng):
    assert sphere_rank_condition(2, 2) and not sphere_rank_condition(2, 1)
    pts = np.stack([random_unit_vector(3, rng) for _ in range(20)])
    pole, worst = find_unhit_point(pts)
    assert worst < 1.0 and np.max((pts.conj() @ pole).real) == pytest.approx(worst)


def test_rset_precondition_and_defect():
    e = np.eye(3, dtype=complex)
    with pytest.raises(PreconditionError):
        RSet(e[0], e[0], e[0], 0.1)
    rset = RSet((e[0] + e[1]) / np.sqrt(2), e[0], e[1], 0.1)
    assert rset.defect(np.eye(3)) < 1e-15
    assert rset.defect(np.diag([1.0, -1.0, 1.0])) > 0.5


def test_contract_in_r(rng):
    rset, members = r_family(6, 0.05, 0.1, rng)
    paths = contract_in_r(members, 0.05, rset)
    ends = np.stack([p.end for p in paths])
    assert np.abs(ends - ends[0]).max() < 1e-12
    for p, u in zip(paths, members):
        assert np.allclose(p.start, u, atol=1e-14)
        assert p.max_dist_from_identity <= 3 * 0.05
        assert max(rset.defect(x) for x in p.unitaries) < 1e-8


# Frozen from a seeded run; the constant bound is 39 sqrt(delta) = 0.8720665...
FROZEN_S = [
    ((0.5, 0.0), "large_overlap", "ball_inside_s", 0.0003517510862765061),
    ((0.1 + 1.9 * DELTA, 0.1), "large_overlap", "corner_alignment", 0.0004198950889209324),
    ((4e-4, 0.0), "small_overlap", "trivial_level", 0.02000100017504199),
    ((4e-4, 1e-4), "small_overlap", "corner_sphere_lift", 0.00035343090083268623),
]


@pytest.mark.parametrize("params,branch,sub,frozen", FROZEN_S)
def test_contract_in_s_branches(params, branch, sub, frozen):
    weight, t = params
    fam, ball = s_ball_circle(8, 4, weight, t, DELTA, np.random.default_rng(7))
    paths, rep = contract_in_s(fam, ball)
    assert (rep.branch, rep.sub_branch) == (branch, sub)
    assert rep.realized_max_distance == pytest.approx(frozen, rel=1e-8)
    assert rep.realized_max_distance <= 39 * np.sqrt(DELTA)
    assert rep.min_membership_slack >= -1e-8
    assert rep.endpoint_spread < 1e-12
    for p, u in zip(paths, fam.members):
        assert np.array_equal(p.start, u)
        assert min(ball.slack(x) for x in p.unitaries) >= -1e-8
    d = rep.to_dict()
    assert d["bound"] == rep.bound and all(s["margin"] >= 0 for s in d["stages"])


def test_contract_in_s_is_deterministic_across_workers():
    fam, ball = s_ball_circle(8, 4, 4e-4, 1e-4, DELTA, np.random.default_rng(3))
    a, _ = contract_in_s(fam, ball, workers=1)
    b, _ = contract_in_s(fam, ball, workers=4)
    assert all(np.array_equal(x.unitaries, y.unitaries) for x, y in zip(a, b))


def test_contract_in_s_rejects_members_outside_ball():
    fam, ball = s_ball_circle(8, 4, 0.5, 0.0, DELTA, np.random.default_rng(0), radius=3.0)
    with pytest.raises(ValueError, match="not inside"):
        contract_in_s(fam, ball)
    with pytest.raises(ValueError, match="1/1296"):
        contract_in_s(fam, SBall(ball.psi, ball.p, 0.0, 1e-3))


def test_contract_in_s_sphere_family_in_m2_is_obstructed():
    sphere = bloch_sphere_family(5, 6)
    members = []
    for v in sphere.vectors:
        rho = np.outer(v, v.conj())
        x = [np.trace(rho @ s).real for s in (SX, SY, SZ)]
        h = SX + 0.5 * (x[0] * SX + x[1] * SY + x[2] * SZ)
        members.append(unitary_exp(DELTA / 3 * h))
    fam = UnitaryFamily(np.stack(members), 2, sphere.edges)
    ball = SBall(np.array([0, 1.0]), Projection(AlgebraShape((2,)), np.diag([1.0, 0.0])), 1e-9, DELTA)
    with pytest.raises(Obstruction) as info:
        contract_in_s(fam, ball)
    assert info.value.report["reason"] == "rank_condition"
    assert info.value.report["corner_rank"] == 1
