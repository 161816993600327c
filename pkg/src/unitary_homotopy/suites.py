"""Seeded invariant suites, one per module, each reducing to a worst residual."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .contract import iterate_contraction, loop_family, weak_star_convergence_check
from .geodesic import geodesic_unitary, pure_state_norm_distance
from .homotopy import contract_in_s, corner_align, deform_to_geodesic, padded_sphere_contraction
from .mats import (
    dagger,
    distance_from_identity,
    haar_unitary,
    operator_norm,
    principal_log_unitary,
    random_hermitian,
    random_unit_vector,
    unitarity_defect,
    unitary_exp,
)
from .nctorus import RotationParams, relation_residual
from .sampling import corner_instance, positive_pair, projection_instance, s_ball_circle, z_instance
from .state import AlgebraShape, PureState, excision_projections, excision_defect, move_distance, move_onto_projection

DEFAULT_TOLERANCES = {
    "mats": 1e-10,
    "geodesic": 1e-9,
    "state": 1e-9,
    "excision": 1e-12,
    "homotopy": 1e-8,
    "contraction": 1e-8,
    "iteration": 1e-8,
    "nctorus": 1e-12,
    "norm_distance": 1e-9,
    "padded_sphere": 1e-12,
}


@dataclass(frozen=True)
class SuiteResult:
    name: str
    cases: int
    max_residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "cases": self.cases,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _mats(rng, n):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 9))
        u = haar_unitary(d, rng)
        if np.min(np.abs(np.linalg.eigvals(u) + 1)) < 1e-3:
            continue
        a = principal_log_unitary(u)
        worst = max(worst, operator_norm(unitary_exp(a) - u), unitarity_defect(unitary_exp(random_hermitian(d, rng))))
    return n, worst


def _geodesic(rng, n):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 17))
        psi, omega = positive_pair(d, rng)
        g = geodesic_unitary(psi, omega)
        v = g.unitary
        lam = np.linalg.eigvals(v)
        spectrum_gap = np.min(np.abs(lam[:, None] - np.exp(1j * np.array([g.theta, -g.theta, 0.0]))[None]), axis=1).max()
        worst = max(
            worst,
            np.linalg.norm(v @ psi - omega),
            unitarity_defect(v),
            abs(distance_from_identity(v) - np.linalg.norm(psi - omega)),
            spectrum_gap,
        )
    return n, worst


def _state(rng, n):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 17))
        psi, p = projection_instance(d, rng)
        u = move_onto_projection(PureState.from_vector(psi), p)
        after = np.linalg.norm(p.matrix @ u @ psi) ** 2
        worst = max(worst, abs(after - 1), abs(distance_from_identity(u) - move_distance(psi, p.matrix)))
    return n, worst


def _excision(rng, n):
    worst, cases = 0.0, 0
    for m in range(1, 7):
        shape = AlgebraShape((2,) * m)
        factors = [random_unit_vector(2, rng) for _ in range(m)]
        vec = factors[0]
        for f in factors[1:]:
            vec = np.kron(vec, f)
        ref = PureState(shape, vec)
        projs = excision_projections(shape, ref)
        for k in range(1, m + 1):
            for _ in range(max(1, n // 12)):
                local = random_hermitian(2**k, rng) + 1j * random_hermitian(2**k, rng)
                a = shape.embed(local)
                worst = max(worst, excision_defect(projs[k - 1], a, ref))
                cases += 1
    return cases, worst


def _homotopy(rng, n):
    worst = 0.0
    for _ in range(n):
        psi, u = z_instance(6, rng)
        path = deform_to_geodesic(u, psi)
        g = geodesic_unitary(psi, u @ psi).unitary
        dist = distance_from_identity(u)
        worst = max(
            worst,
            operator_norm(path.start - u),
            operator_norm(path.end - g),
            max(np.linalg.norm(x @ psi - u @ psi) for x in path.unitaries),
            max(0.0, path.max_dist_from_identity - 3 * dist),
        )
        u, p, psi, gamma, delta = corner_instance(8, 3, rng)
        path = corner_align(u, p, psi, gamma, delta)
        q = np.eye(8) - p
        npu = np.linalg.norm(p @ u @ psi)
        target = npu * p @ psi / np.linalg.norm(p @ psi)
        worst = max(
            worst,
            operator_norm(path.start - u),
            max(operator_norm(q @ x - q @ u) for x in path.unitaries),
            max(abs(np.linalg.norm(p @ x @ psi) - npu) for x in path.unitaries),
            np.linalg.norm(p @ path.end @ psi - target),
            max(0.0, path.max_dist_from_identity - path.meta["bound"]),
        )
    return 2 * n, worst


def _contraction(rng, n):
    delta = 5e-4
    worst, cases = 0.0, 0
    for weight, t in [(0.5, 0.0), (0.1 + 1.9 * delta, 0.1), (4e-4, 1e-4)]:
        fam, ball = s_ball_circle(8, 4, weight, t, delta, rng, vertices=max(3, n // 4))
        paths, rep = contract_in_s(fam, ball)
        worst = max(
            worst,
            max(0.0, -rep.min_membership_slack),
            max(0.0, rep.realized_max_distance - rep.bound),
            rep.endpoint_spread,
        )
        cases += len(paths)
    return cases, worst


def _iteration(rng, n):
    shape = AlgebraShape((2, 2, 2, 2))
    e = np.zeros(16, dtype=complex)
    e[0] = 1
    ref = PureState(shape, e)
    fam = loop_family(shape, ref, max(3, n), seed=int(rng.integers(1 << 31)))
    trace = iterate_contraction(fam, ref, 4, grid=9)
    obs = []
    for k in range(1, 5):
        local = random_hermitian(2**k, rng)
        obs.append((shape.embed(local), k))
    checks = weak_star_convergence_check(trace, fam, obs)
    base = np.abs(trace.unitaries[fam.base_vertex] - np.eye(16)).max()
    return len(fam) * len(obs), max([c.max_tail_deviation for c in checks] + [base])


def _nctorus(rng, n):
    worst, cases = 0.0, 0
    grid = np.exp(2j * np.pi * np.arange(16) / 16)
    for q in range(2, 7):
        for p in range(1, q):
            if np.gcd(p, q) != 1:
                continue
            params = RotationParams(p, q)
            for z1 in grid:
                for z2 in grid:
                    worst = max(worst, relation_residual(params, z1, z2))
                    cases += 1
    return cases, worst


def _norm_distance(rng, n):
    worst = 0.0
    for _ in range(n):
        d = int(rng.integers(2, 9))
        a, b = random_unit_vector(d, rng), random_unit_vector(d, rng)
        rho = np.outer(a, a.conj()) - np.outer(b, b.conj())
        tn = np.abs(np.linalg.eigvalsh(rho)).sum()
        worst = max(worst, abs(tn - pure_state_norm_distance(a, b)))
    return n, worst


def _padded(rng, n):
    worst = 0.0
    ts = np.linspace(0, 1, 201)
    for _ in range(n):
        om = random_unit_vector(int(rng.integers(1, 9)), rng)
        end1 = padded_sphere_contraction(om, 1, 1.0)
        for t in ts:
            _, d1 = padded_sphere_contraction(om, 1, t, return_denominator=True)
            _, d2 = padded_sphere_contraction(end1, 2, t, return_denominator=True)
            worst = max(worst, 1 / np.sqrt(2) - d1, 1 / np.sqrt(2) - d2)
    return n, max(worst, 0.0)


SUITES: dict[str, Callable] = {
    "mats": _mats,
    "geodesic": _geodesic,
    "state": _state,
    "excision": _excision,
    "homotopy": _homotopy,
    "contraction": _contraction,
    "iteration": _iteration,
    "nctorus": _nctorus,
    "norm_distance": _norm_distance,
    "padded_sphere": _padded,
}


def run_suites(seed: int = 0, cases: int = 40, tolerances: dict | None = None) -> list[SuiteResult]:
    tols = dict(DEFAULT_TOLERANCES)
    tols.update(tolerances or {})
    out = []
    for i, (name, fn) in enumerate(SUITES.items()):
        rng = np.random.default_rng([seed, i])
        count, worst = fn(rng, cases)
        out.append(SuiteResult(name, int(count), float(worst), float(tols[name])))
    return out
