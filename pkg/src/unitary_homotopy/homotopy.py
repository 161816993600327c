"""Sampled unitary homotopies and the nulhomotopy of small balls intersected with S.

Paths are sampled on uniform time grids.  ``S`` is the set of unitaries ``U``
with ``||P U psi||^2 >= t``; ``contract_in_s`` deforms a sampled family of
unitaries near the identity inside ``S`` to a single unitary while tracking
the distance from the identity against fixed constants.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .geodesic import REAL_TOL, as_state_vector, geodesic_unitary, inner, phase_extended_unitary
from .mats import (
    UNITARY_TOL,
    dagger,
    distance_from_identity,
    is_unitary,
    operator_norm,
    principal_log_unitary,
    unitary_exp,
    unitary_exp_path,
)
from .state import Projection, corner_isometry, projection_generator

GRID_POINTS = 33
MIN_LIFT_OVERLAP = 0.1
MEMBERSHIP_TOL = 1e-10
DELTA_MAX = 1.0 / 1296.0
ZERO_OVERLAP_WINDOW = 7.0 / 16.0
SMALL_OVERLAP_WINDOW = 1.0 / 36.0


def uniform_grid(points: int = GRID_POINTS) -> np.ndarray:
    if points < 2:
        raise ValueError("a time grid needs at least two points")
    return np.linspace(0.0, 1.0, points)


def _grid(grid) -> np.ndarray:
    if grid is None:
        return uniform_grid()
    if isinstance(grid, (int, np.integer)):
        return uniform_grid(int(grid))
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 2 or g[0] != 0.0 or g[-1] != 1.0 or np.any(np.diff(g) <= 0):
        raise ValueError("time grid must increase strictly from 0 to 1")
    return g


def _matrix(p) -> np.ndarray:
    return p.matrix if isinstance(p, Projection) else np.asarray(p, dtype=complex)


class PreconditionError(ValueError):
    """One or more named hypotheses of a construction fail."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("precondition violated: " + "; ".join(self.violations))


class SubdivisionNeeded(ValueError):
    def __init__(self, index: int, overlap: float):
        self.index = index
        self.overlap = overlap
        super().__init__(f"consecutive overlap {overlap:.3g} at index {index} is too small; subdivide")


class Obstruction(Exception):
    """No constructive contraction is available; ``report`` explains why."""

    def __init__(self, report: dict):
        self.report = report
        super().__init__(report.get("message", "obstruction"))


@dataclass(frozen=True, eq=False)
class UnitaryPath:
    times: np.ndarray
    unitaries: np.ndarray
    max_step: float
    max_dist_from_identity: float
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, times, unitaries, **meta) -> "UnitaryPath":
        times = np.asarray(times, dtype=float)
        us = np.asarray(unitaries, dtype=complex)
        if us.ndim != 3 or us.shape[0] != times.size:
            raise ValueError("need one square matrix per time sample")
        if times[0] != 0.0 or times[-1] != 1.0:
            raise ValueError("path times must start at 0 and end at 1")
        eye = np.eye(us.shape[1])
        dist = np.linalg.norm(eye - us, 2, axis=(1, 2))
        steps = np.linalg.norm(np.diff(us, axis=0), 2, axis=(1, 2)) if len(us) > 1 else np.zeros(1)
        return cls(times, us, float(steps.max(initial=0.0)), float(dist.max()), dict(meta))

    @property
    def start(self) -> np.ndarray:
        return self.unitaries[0]

    @property
    def end(self) -> np.ndarray:
        return self.unitaries[-1]

    def right_multiply(self, v: np.ndarray) -> "UnitaryPath":
        return UnitaryPath.from_samples(self.times, self.unitaries @ v, **self.meta)


def concatenate(paths: Sequence[UnitaryPath], join_tol: float = 1e-9) -> UnitaryPath:
    """Runs the paths one after another on equal-length subintervals of [0, 1]."""
    k = len(paths)
    times, samples = [], []
    for j, path in enumerate(paths):
        t = (j + path.times) / k
        u = path.unitaries
        if j:
            if operator_norm(samples[-1][-1] - u[0]) > join_tol:
                raise ValueError(f"path {j} does not start where path {j - 1} ends")
            t, u = t[1:], u[1:]
        times.append(t)
        samples.append(u)
    times = np.concatenate(times)
    times[-1] = 1.0
    return UnitaryPath.from_samples(times, np.concatenate(samples))


def _pmap(fn: Callable, items: Sequence, workers: int | None) -> list:
    if workers and workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------------------
# Single-unitary deformations


def deform_to_geodesic(u: np.ndarray, psi: np.ndarray, grid=None) -> UnitaryPath:
    """Deforms ``U`` to the geodesic rotation from ``psi`` to ``U psi``.

    Every sample maps ``psi`` to ``U psi``.  Requires ``<psi, U psi>`` real
    positive and ``||1 - U|| < 1``; the path stays within ``3 ||1 - U||`` of
    the identity.
    """
    grid = _grid(grid)
    u = np.asarray(u, dtype=complex)
    psi = as_state_vector(psi)
    c = inner(psi, u @ psi)
    dist = distance_from_identity(u)
    bad = []
    if abs(c.imag) > REAL_TOL or c.real <= 1e-10:
        bad.append(f"<psi, U psi> = {c:.3e} is not real positive")
    if dist >= 1.0:
        bad.append(f"||1 - U|| = {dist:.3e} is not below 1")
    if bad:
        raise PreconditionError(bad)
    g = geodesic_unitary(psi, u @ psi).unitary
    a = principal_log_unitary(dagger(g) @ u)
    samples = g @ unitary_exp_path(a, 1.0 - grid)
    samples[0] = u
    return UnitaryPath.from_samples(grid, samples, generator_norm=operator_norm(a))


def corner_beta(gamma: float, p_psi_norm: float, delta: float) -> float:
    """``1/sqrt(gamma |P psi|) + sqrt(2 / (2 gamma |P psi| - delta^2))``."""
    g = gamma * p_psi_norm
    return 1.0 / np.sqrt(g) + np.sqrt(2.0 / (2.0 * g - delta * delta))


def corner_align(
    u: np.ndarray, p, psi: np.ndarray, gamma: float, delta: float, grid=None
) -> UnitaryPath:
    """Rotates ``P U psi`` inside the corner of ``P`` until it points along ``P psi``.

    The path is ``exp(isA) U`` where ``exp(iA)`` acts as the identity on the
    range of ``1 - P``.  It keeps ``(1 - P) U`` and ``||P U psi||`` fixed and
    ends with ``P U psi = ||P U psi|| P psi / ||P psi||``.

    Args:
        u: unitary with ``||P U psi|| >= gamma`` and ``||1 - U|| < delta``.
        p: projection with ``P psi != 0``.
        psi: unit vector.
        gamma: lower bound on ``||P U psi||``.
        delta: radius of the ball around the identity.
        grid: time grid or number of points.

    Raises:
        PreconditionError: listing every hypothesis that fails.
    """
    grid = _grid(grid)
    pm = _matrix(p)
    u = np.asarray(u, dtype=complex)
    psi = as_state_vector(psi)
    pv = pm @ psi
    n_ppsi = float(np.linalg.norm(pv))
    pu = pm @ (u @ psi)
    n_pu = float(np.linalg.norm(pu))
    dist = distance_from_identity(u)
    bad = []
    if n_ppsi == 0.0:
        raise PreconditionError(["P psi = 0"])
    if n_pu < gamma:
        bad.append(f"||P U psi|| = {n_pu:.6g} < gamma = {gamma:.6g}")
    if dist >= delta:
        bad.append(f"||1 - U|| = {dist:.6g} >= delta = {delta:.6g}")
    if delta * delta >= 2.0 * gamma * n_ppsi:
        bad.append(f"delta^2 = {delta * delta:.6g} >= 2 gamma ||P psi|| = {2 * gamma * n_ppsi:.6g}")
        beta = np.inf
    else:
        beta = corner_beta(gamma, n_ppsi, delta)
        if beta * delta >= 2.0:
            bad.append(f"beta delta = {beta * delta:.6g} >= 2")
    if bad:
        raise PreconditionError(bad)
    iso = corner_isometry(pm)
    om_u = dagger(iso) @ pu / n_pu
    om_1 = dagger(iso) @ pv / n_ppsi
    rot = iso @ phase_extended_unitary(om_u / np.linalg.norm(om_u), om_1 / np.linalg.norm(om_1)) @ dagger(iso)
    a = principal_log_unitary(np.eye(pm.shape[0]) - pm + rot)
    samples = unitary_exp_path(a, grid) @ u
    samples[0] = u
    return UnitaryPath.from_samples(
        grid, samples, beta=float(beta), bound=float((1.0 + beta) * dist), generator_norm=operator_norm(a)
    )


# ---------------------------------------------------------------------------
# Spheres and lifting


def padded_sphere_contraction(omega: np.ndarray, stage: int, t: float, return_denominator: bool = False):
    """Finite model of the two-leg contraction of a sphere inside a doubled space.

    Vectors of ``C^d`` sit in the first half of ``C^{2d}`` and ``S`` shifts them
    to the second half.  Stage 1 moves ``omega`` to ``S omega`` and stage 2
    (which takes a vector of the second half) moves it to ``e_1``.  Both legs
    interpolate between orthogonal unit vectors, so the normalizing
    denominator never drops below ``1/sqrt(2)``.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    omega = as_state_vector(omega)
    if stage == 1:
        d = omega.size
        start = np.concatenate([omega, np.zeros(d, dtype=complex)])
        end = np.concatenate([np.zeros(d, dtype=complex), omega])
    elif stage == 2:
        if omega.size % 2:
            raise ValueError("stage 2 expects a vector of the doubled space")
        d = omega.size // 2
        if np.linalg.norm(omega[:d]) > 1e-12:
            raise ValueError("stage 2 expects the end point of stage 1")
        start = omega
        end = np.zeros(2 * d, dtype=complex)
        end[0] = 1.0
    else:
        raise ValueError("stage must be 1 or 2")
    num = t * end + (1.0 - t) * start
    den = float(np.linalg.norm(num))
    out = num / den
    return (out, den) if return_denominator else out


def lift_path(
    base_path: Sequence[np.ndarray],
    start_unitary: np.ndarray,
    base_point: np.ndarray,
    times=None,
    min_overlap: float = MIN_LIFT_OVERLAP,
) -> UnitaryPath:
    """Lifts a sampled path of unit vectors to unitaries through the orbit map.

    Each step multiplies by the phase-extended rotation between consecutive
    samples, so ``V_k base_point = y_k``.

    Raises:
        SubdivisionNeeded: if consecutive samples overlap by at most ``min_overlap``.
    """
    ys = [as_state_vector(y, tol=1e-10) for y in base_path]
    v = np.asarray(start_unitary, dtype=complex)
    b = as_state_vector(base_point, tol=1e-10)
    if np.linalg.norm(v @ b - ys[0]) > 1e-9:
        raise ValueError("start unitary does not map the base point to the first sample")
    out = [v]
    for k in range(len(ys) - 1):
        c = abs(inner(ys[k], ys[k + 1]))
        if c <= min_overlap:
            raise SubdivisionNeeded(k, c)
        out.append(phase_extended_unitary(ys[k], ys[k + 1]) @ out[-1])
    times = np.linspace(0.0, 1.0, len(ys)) if times is None else times
    if len(ys) == 1:
        times, out = np.array([0.0, 1.0]), out * 2
    return UnitaryPath.from_samples(times, np.stack(out))


def _stereo(y: np.ndarray, pole: np.ndarray) -> np.ndarray:
    c = inner(pole, y).real
    return (y - c * pole) / (1.0 - c)


def _unstereo(v: np.ndarray, pole: np.ndarray) -> np.ndarray:
    n2 = float(np.vdot(v, v).real)
    y = (2.0 * v + (n2 - 1.0) * pole) / (n2 + 1.0)
    return y / np.linalg.norm(y)


def sphere_rank_condition(family_dim: int, corner_rank: int) -> bool:
    """Whether every map of an ``n``-complex into the unit sphere of ``C^r`` is contractible
    by the constructive route: the sphere is ``2r - 2`` connected."""
    return family_dim <= 2 * corner_rank - 2


def find_unhit_point(points: np.ndarray, seed: int = 0, candidates: int = 256) -> tuple[np.ndarray, float]:
    """A unit vector far from every row of ``points``; returns it and its largest real overlap."""
    pts = np.asarray(points, dtype=complex)
    r = pts.shape[1]
    rng = np.random.default_rng(seed)
    cands = [-pts.mean(axis=0)]
    z = rng.standard_normal((candidates, r)) + 1j * rng.standard_normal((candidates, r))
    cands.extend(z)
    best, best_val = None, np.inf
    for c in cands:
        n = np.linalg.norm(c)
        if n < 1e-12:
            continue
        c = c / n
        val = float(np.max((pts.conj() @ c).real))
        if val < best_val:
            best, best_val = c, val
    return best, best_val


# ---------------------------------------------------------------------------
# Sets S and R


@dataclass(frozen=True, eq=False)
class SBall:
    """Ball ``B_delta(1)`` intersected with ``S = {U : ||P U psi||^2 >= t_level}``."""

    psi: np.ndarray
    p: Projection
    t_level: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "psi", as_state_vector(self.psi))
        if not isinstance(self.p, Projection):
            raise TypeError("p must be a Projection")
        if self.psi.size != self.p.shape.total_dim:
            raise ValueError("psi and P have different dimensions")
        if not 0.0 <= self.t_level <= 0.25:
            raise ValueError("t_level must lie in [0, 1/4]")
        if self.delta <= 0.0:
            raise ValueError("delta must be positive")

    def slack(self, u: np.ndarray) -> float:
        """``||P U psi||^2 - t``; nonnegative exactly on S."""
        return float(np.linalg.norm(self.p.matrix @ (u @ self.psi)) ** 2 - self.t_level)


@dataclass(frozen=True, eq=False)
class RSet:
    """Unitaries mapping ``psi`` to ``a omega + sqrt(1 - a^2) phi`` with ``a`` in ``[sqrt(t), 1)``."""

    psi: np.ndarray
    omega: np.ndarray
    phi: np.ndarray
    t_level: float
    tol: float = 1e-10

    def __post_init__(self):
        psi, om, ph = (as_state_vector(v, tol=1e-10) for v in (self.psi, self.omega, self.phi))
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "phi", ph)
        bad = []
        a, b, c = inner(psi, om), inner(ph, psi), inner(ph, om)
        if abs(a.imag) > self.tol or a.real < -self.tol:
            bad.append(f"<psi, omega> = {a:.3e} is not >= 0")
        if abs(b.imag) > self.tol or b.real <= 0.0:
            bad.append(f"<phi, psi> = {b:.3e} is not > 0")
        if abs(c) > self.tol:
            bad.append(f"<phi, omega> = {c:.3e} is not 0")
        if bad:
            raise PreconditionError(bad)

    def defect(self, u: np.ndarray) -> float:
        """Zero exactly on R; otherwise the worst violated equality or inequality."""
        y = u @ self.psi
        a, b = inner(self.omega, y), inner(self.phi, y)
        ar = min(max(a.real, -1.0), 1.0)
        return max(
            abs(a.imag),
            abs(b.imag),
            np.sqrt(self.t_level) - a.real,
            abs(b.real - np.sqrt(max(0.0, 1.0 - ar * ar))),
            0.0 if a.real < 1.0 else a.real - 1.0 + 1e-16,
        )


def _r_stages(
    members: Sequence[np.ndarray], zeta: float, rset: RSet, grid, base_index: int, workers, tol: float
) -> tuple[list[UnitaryPath], list[UnitaryPath]]:
    grid = _grid(grid)
    if not 0.0 < zeta <= 1.0:
        raise ValueError("zeta must lie in (0, 1]")
    bad = []
    for k, u in enumerate(members):
        d = distance_from_identity(u)
        if d >= zeta:
            bad.append(f"member {k}: ||1 - U|| = {d:.6g} >= zeta = {zeta:.6g}")
        m = rset.defect(u)
        if m > tol:
            bad.append(f"member {k}: R-membership defect {m:.3e}")
    if bad:
        raise PreconditionError(bad)
    psi = rset.psi
    target = members[base_index] @ psi
    first = _pmap(lambda u: deform_to_geodesic(u, psi, grid), list(members), workers)

    def interpolate(u):
        y0 = u @ psi
        out = []
        dens = []
        for s in grid:
            y = s * target + (1.0 - s) * y0
            n = np.linalg.norm(y)
            dens.append(n)
            out.append(geodesic_unitary(psi, y / n).unitary)
        return UnitaryPath.from_samples(grid, np.stack(out), min_denominator=float(min(dens)))

    second = _pmap(interpolate, list(members), workers)
    return first, second


def contract_in_r(
    family: Sequence[np.ndarray],
    zeta: float,
    rset: RSet,
    grid=None,
    base_index: int = 0,
    workers: int | None = None,
    tol: float = 1e-8,
) -> list[UnitaryPath]:
    """Contracts a family in ``B_zeta(1)`` intersected with ``R`` to one unitary.

    The first half deforms each member to its geodesic rotation; the second
    half slides ``U psi`` along the normalized chord to the image of a fixed
    member.  Every sample stays within ``3 zeta`` of the identity.
    """
    members = [np.asarray(u, dtype=complex) for u in family]
    first, second = _r_stages(members, zeta, rset, grid, base_index, workers, tol)
    return [concatenate([a, b]) for a, b in zip(first, second)]


# ---------------------------------------------------------------------------
# Contraction of B_delta(1) intersected with S


@dataclass(frozen=True, eq=False)
class UnitaryFamily:
    """Unitaries sampled on the vertices of a parameter complex of dimension ``dim``."""

    members: np.ndarray
    dim: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        m = np.asarray(self.members, dtype=complex)
        if m.ndim == 2:
            m = m[None]
        if m.ndim != 3 or m.shape[1] != m.shape[2] or m.shape[0] == 0:
            raise ValueError("family needs at least one square matrix")
        object.__setattr__(self, "members", m)
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))

    @classmethod
    def circle(cls, members) -> "UnitaryFamily":
        m = np.asarray(members, dtype=complex)
        n = len(m)
        edges = tuple((k, (k + 1) % n) for k in range(n)) if n > 1 else ()
        return cls(m, 1 if n > 1 else 0, edges)

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class StageSummary:
    name: str
    constant: float
    realized_max_distance: float
    max_step: float
    lipschitz_budget: float | None
    min_membership_slack: float

    @property
    def margin(self) -> float:
        return self.constant - self.realized_max_distance

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "constant": self.constant,
            "realized_max_distance": self.realized_max_distance,
            "margin": self.margin,
            "max_step": self.max_step,
            "lipschitz_budget": self.lipschitz_budget,
            "min_membership_slack": self.min_membership_slack,
        }


@dataclass
class ContractionReport:
    branch: str
    sub_branch: str
    delta: float
    t_level: float
    overlap: float
    members: int
    family_dim: int
    thresholds: dict
    constants: dict
    bound_name: str
    stages: list = field(default_factory=list)
    realized_max_distance: float = 0.0
    min_membership_slack: float = 0.0
    endpoint_spread: float = 0.0
    max_adjacent_step: float = 0.0
    obstruction: dict | None = None

    @property
    def bound(self) -> float:
        return self.constants[self.bound_name]

    @property
    def margin(self) -> float:
        return self.bound - self.realized_max_distance

    def to_dict(self) -> dict[str, Any]:
        return {
            "branch": self.branch,
            "sub_branch": self.sub_branch,
            "delta": self.delta,
            "t_level": self.t_level,
            "overlap": self.overlap,
            "members": self.members,
            "family_dim": self.family_dim,
            "thresholds": dict(self.thresholds),
            "constants": dict(self.constants),
            "bound_name": self.bound_name,
            "bound": self.bound,
            "realized_max_distance": self.realized_max_distance,
            "margin": self.margin,
            "min_membership_slack": self.min_membership_slack,
            "endpoint_spread": self.endpoint_spread,
            "max_adjacent_step": self.max_adjacent_step,
            "stages": [s.to_dict() for s in self.stages],
            "obstruction": self.obstruction,
        }


def _log_contraction(u: np.ndarray, grid: np.ndarray) -> UnitaryPath:
    a = principal_log_unitary(u)
    samples = unitary_exp_path(a, 1.0 - grid)
    samples[0] = u
    return UnitaryPath.from_samples(grid, samples, generator_norm=operator_norm(a))


def _lift_corner_family(
    omegas: np.ndarray, base_index: int, grid: np.ndarray, seed: int
) -> tuple[list[UnitaryPath], np.ndarray, float]:
    """Contracts ``k -> omegas[k]`` on the unit sphere away from an unhit pole and lifts it.

    Returns corner unitary paths ``E_k`` with ``E_k(0) = 1`` and
    ``E_k(1) omegas[base] = omegas[k]``, the pole and its largest overlap.
    """
    pole, worst = find_unhit_point(omegas, seed=seed)
    if worst > 1.0 - 1e-6:
        raise Obstruction(
            {
                "reason": "no_unhit_point",
                "message": "sampled corner vectors leave no point of the corner sphere unhit",
                "max_pole_overlap": worst,
            }
        )
    v0 = _stereo(omegas[base_index], pole)
    r = omegas.shape[1]
    g = grid
    while True:
        try:
            lifts = []
            for om in omegas:
                v1 = _stereo(om, pole)
                ys = [_unstereo((1.0 - s) * v0 + s * v1, pole) for s in g]
                ys[0], ys[-1] = omegas[base_index], om
                lifts.append(lift_path(ys, np.eye(r), omegas[base_index], times=g))
            break
        except SubdivisionNeeded:
            # One grid for all members keeps the lifted family comparable vertex to vertex.
            if g.size > 2**14:
                raise
            g = np.linspace(0.0, 1.0, 2 * g.size - 1)
    return lifts, pole, worst


def contract_in_s(
    family: UnitaryFamily,
    ball: SBall,
    grid=None,
    base_index: int = 0,
    workers: int | None = None,
    seed: int = 0,
    membership_tol: float = MEMBERSHIP_TOL,
) -> tuple[list[UnitaryPath], ContractionReport]:
    """Contracts a family in ``B_delta(1)`` intersected with ``S`` inside ``B_{39 sqrt(delta)}(1)`` and ``S``.

    Dispatches on ``||P psi||^2 >= 2 delta``.  With large overlap either the
    whole ball lies in ``S`` and each member is contracted along its logarithm,
    or the family is aligned in the corners of ``1 - P`` and ``P`` and then
    contracted inside ``R``.  With small overlap, ``psi`` is first rotated onto
    the range of ``1 - P``; the family of ``P``-components is contracted on the
    corner sphere, lifted to corner unitaries, aligned and contracted inside
    ``R``.

    Args:
        family: sampled unitaries with their parameter dimension.
        ball: the set ``B_delta(1)`` and ``S`` data; needs ``0 < delta < 1/1296``.
        grid: time grid (or number of points) used for every stage.
        base_index: member whose image fixes the common end point.
        workers: thread count for the per-member map; results do not depend on it.
        seed: seed for choosing the unhit pole on the corner sphere.
        membership_tol: slack allowed when validating the input family.

    Returns:
        One path per member, all ending at the same unitary, and a report.

    Raises:
        ValueError: if delta is out of range or a member is outside the ball or ``S``.
        Obstruction: if the corner sphere argument does not apply.
    """
    grid = _grid(grid)
    delta, t = float(ball.delta), float(ball.t_level)
    if not 0.0 < delta < DELTA_MAX:
        raise ValueError(f"delta = {delta} must lie in (0, 1/1296)")
    members = family.members
    d = ball.psi.size
    if members.shape[1] != d:
        raise ValueError("family and ball have different dimensions")
    bad = []
    for k, u in enumerate(members):
        if not is_unitary(u, UNITARY_TOL):
            bad.append(f"member {k} is not unitary")
            continue
        dist = distance_from_identity(u)
        if dist >= delta + membership_tol:
            bad.append(f"member {k}: ||1 - U|| = {dist:.6g} >= delta")
        if ball.slack(u) < -membership_tol:
            bad.append(f"member {k}: ||P U psi||^2 = {ball.slack(u) + t:.6g} < t")
    if bad:
        raise ValueError("family is not inside B_delta(1) and S: " + "; ".join(bad))

    psi = ball.psi
    pm = ball.p.matrix
    qm = np.eye(d) - pm
    w = float(np.linalg.norm(pm @ psi) ** 2)
    sd = np.sqrt(delta)
    gamma_s = float(np.sqrt(2 * delta / (1 - 2 * delta)))
    constants = {
        "contraction_39_sqrt_delta": 39 * sd,
        "large_overlap_h1_4_delta": 4 * delta,
        "large_overlap_h2_13_sqrt_delta": 13 * sd,
        "small_overlap_32_sqrt_delta": 32 * sd,
    }
    thresholds = {
        "large_small_split_2_delta": 2 * delta,
        "ball_inside_s_t_plus_2_delta": t + 2 * delta,
        "delta_max": DELTA_MAX,
        "zero_overlap_window": ZERO_OVERLAP_WINDOW,
        "small_overlap_window": SMALL_OVERLAP_WINDOW,
    }
    stages: list[tuple[str, float, list[UnitaryPath]]] = []
    common = dict(delta=delta, t_level=t, overlap=w, members=len(members), family_dim=family.dim)

    if w >= 2 * delta:
        branch = "large_overlap"
        if w >= t + 2 * delta:
            sub = "ball_inside_s"
            paths = _pmap(lambda u: _log_contraction(u, grid), list(members), workers)
            stages.append(("logarithm", delta, paths))
        else:
            sub = "corner_alignment"
            gamma_p = float(np.sqrt(2 * delta) - delta)
            h1 = _pmap(lambda u: corner_align(u, qm, psi, 45 / 64, delta, grid), list(members), workers)
            h2 = _pmap(lambda p: corner_align(p.end, pm, psi, gamma_p, 4 * delta, grid), h1, workers)
            zeta = 13 * sd
            rset = RSet(psi, pm @ psi / np.sqrt(w), qm @ psi / np.sqrt(1 - w), t)
            r1, r2 = _r_stages([p.end for p in h2], zeta, rset, grid, base_index, workers, 1e-8)
            constants["r_set_3_zeta"] = 3 * zeta
            constants["r_set_interpolation"] = 2**0.25 * zeta
            stages += [
                ("align_complement", 4 * delta, h1),
                ("align_projection", 13 * sd, h2),
                ("r_deform_to_geodesic", 3 * zeta, r1),
                ("r_interpolate", 2**0.25 * zeta, r2),
            ]
        bound_name = "contraction_39_sqrt_delta"
    else:
        if w <= 1e-20:
            branch, v, delta_z = "zero_overlap", np.eye(d, dtype=complex), delta
            shift = 0.0
        else:
            if delta >= SMALL_OVERLAP_WINDOW:
                raise ValueError("small-overlap branch needs delta < 1/36")
            branch = "small_overlap"
            v = unitary_exp(projection_generator(psi, qm))
            delta_z = delta + gamma_s
            shift = gamma_s
            constants["small_overlap_rotation_gamma"] = gamma_s
        if delta_z >= ZERO_OVERLAP_WINDOW:
            raise ValueError("zero-overlap reduction needs radius below 7/16")
        psi_z = v @ psi
        psi_z = psi_z / np.linalg.norm(psi_z)
        red = [u @ dagger(v) for u in members]
        constants["zero_overlap_12_delta"] = 12 * delta_z
        constants["zero_overlap_plus_rotation"] = 12 * delta_z + shift
        bound_name = "small_overlap_32_sqrt_delta" if branch == "small_overlap" else "zero_overlap_12_delta"
        if t == 0.0:
            sub = "trivial_level"
            paths = _pmap(lambda u: _log_contraction(u, grid).right_multiply(v), red, workers)
            stages.append(("logarithm", delta_z + shift, paths))
        else:
            sub = "corner_sphere_lift"
            r = int(round(np.trace(pm).real))
            if not sphere_rank_condition(family.dim, r):
                raise Obstruction(
                    {
                        "reason": "rank_condition",
                        "message": (
                            f"family dimension {family.dim} exceeds 2r - 2 = {2 * r - 2} for corner rank "
                            f"r = {r}; the corner sphere of real dimension {2 * r - 1} need not contract "
                            "the sampled family"
                        ),
                        "family_dim": family.dim,
                        "corner_rank": r,
                        "condition": "family_dim <= 2 * corner_rank - 2",
                        "branch": branch,
                        **common,
                    }
                )
            iso = corner_isometry(pm)
            pus = np.stack([dagger(iso) @ (pm @ (u @ psi_z)) for u in red])
            omegas = pus / np.linalg.norm(pus, axis=1, keepdims=True)
            try:
                lifts, pole, worst = _lift_corner_family(omegas, base_index, grid, seed)
            except Obstruction as exc:
                exc.report.update(branch=branch, **common)
                raise
            thresholds["pole_max_overlap"] = worst

            def conj(pair):
                u, lift = pair
                fs = iso @ lift.unitaries @ dagger(iso) + qm
                return UnitaryPath.from_samples(lift.times, dagger(fs) @ u @ fs)

            h1 = _pmap(conj, list(zip(red, lifts)), workers)
            h2 = _pmap(lambda p: corner_align(p.end, qm, psi_z, 9 / 16, delta_z, grid), h1, workers)
            omega0 = iso @ omegas[base_index]
            rset = RSet(psi_z, omega0, psi_z, t)
            zeta = 4 * delta_z
            r1, r2 = _r_stages([p.end for p in h2], zeta, rset, grid, base_index, workers, 1e-8)
            constants["r_set_3_zeta"] = 3 * zeta

            def back(paths):
                return [p.right_multiply(v) for p in paths]

            stages += [
                ("lift_conjugation", delta_z + shift, back(h1)),
                ("align_complement", 4 * delta_z + shift, back(h2)),
                ("r_deform_to_geodesic", 3 * zeta + shift, back(r1)),
                ("r_interpolate", 2**0.25 * zeta + shift, back(r2)),
            ]

    per_member = []
    for k in range(len(members)):
        parts = [paths[k] for _, _, paths in stages]
        first = parts[0]
        fixed = first.unitaries.copy()
        fixed[0] = members[k]
        parts[0] = UnitaryPath.from_samples(first.times, fixed, **first.meta)
        per_member.append(concatenate(parts))

    report = ContractionReport(
        branch=branch,
        sub_branch=sub,
        thresholds=thresholds,
        constants=constants,
        bound_name=bound_name,
        **common,
    )
    slack_all = np.inf
    for name, const, paths in stages:
        slack = min(min(ball.slack(u) for u in p.unitaries) for p in paths)
        slack_all = min(slack_all, slack)
        budget = None
        norms = [p.meta.get("generator_norm") for p in paths]
        if all(n is not None for n in norms):
            budget = float(max(norms) * np.max(np.diff(grid)))
        report.stages.append(
            StageSummary(
                name=name,
                constant=float(const),
                realized_max_distance=max(p.max_dist_from_identity for p in paths),
                max_step=max(p.max_step for p in paths),
                lipschitz_budget=budget,
                min_membership_slack=float(slack),
            )
        )
    ends = np.stack([p.end for p in per_member])
    report.realized_max_distance = max(p.max_dist_from_identity for p in per_member)
    report.min_membership_slack = float(slack_all)
    report.endpoint_spread = float(max(operator_norm(e - ends[0]) for e in ends))
    if family.edges:
        report.max_adjacent_step = float(
            max(np.linalg.norm(per_member[a].unitaries - per_member[b].unitaries, 2, axis=(1, 2)).max() for a, b in family.edges)
        )
    return per_member, report
