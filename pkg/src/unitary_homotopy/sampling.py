"""Seeded generators of random valid inputs for the constructions."""

from __future__ import annotations

import numpy as np

from .geodesic import geodesic_unitary, inner
from .homotopy import RSet, SBall, UnitaryFamily, corner_beta
from .mats import dagger, haar_unitary, random_hermitian, random_unit_vector, unitary_exp
from .state import AlgebraShape, Projection


def positive_pair(d: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors with real positive overlap."""
    psi = random_unit_vector(d, rng)
    while True:
        omega = random_unit_vector(d, rng)
        c = inner(psi, omega)
        if abs(c) > 1e-3:
            omega = omega * (abs(c) / c)
            return psi, omega / np.linalg.norm(omega)


def random_projection(d: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    w = haar_unitary(d, rng)[:, :rank]
    p = w @ dagger(w)
    return 0.5 * (p + dagger(p))


def projection_instance(d: int, rng: np.random.Generator, min_overlap: float = 0.05):
    """A unit vector and a projection of random rank with ``||P psi||^2 >= min_overlap``."""
    shape = AlgebraShape((d,))
    while True:
        rank = int(rng.integers(1, d + 1))
        p = random_projection(d, rank, rng)
        psi = random_unit_vector(d, rng)
        if np.linalg.norm(p @ psi) ** 2 >= min_overlap:
            return psi, Projection(shape, p)


def z_instance(d: int, rng: np.random.Generator, max_dist: float = 0.9) -> tuple[np.ndarray, np.ndarray]:
    """A unit vector ``psi`` and a unitary with ``<psi, U psi> > 0`` and ``||1 - U|| < max_dist``."""
    psi = random_unit_vector(d, rng)
    while True:
        u = unitary_exp(random_hermitian(d, rng, rng.uniform(0.01, 0.6)))
        c = inner(psi, u @ psi)
        u = u * (abs(c) / c)
        if np.linalg.norm(np.eye(d) - u, 2) < max_dist:
            return psi, u


def corner_instance(d: int, rank: int, rng: np.random.Generator):
    """Inputs ``(u, P, psi, gamma, delta)`` satisfying every hypothesis of the corner alignment."""
    while True:
        p = random_projection(d, rank, rng)
        psi = random_unit_vector(d, rng)
        npsi = np.linalg.norm(p @ psi)
        dist = rng.uniform(0.005, 0.25)
        u = unitary_exp(random_hermitian(d, rng, 2 * np.arcsin(dist / 2)))
        real = np.linalg.norm(np.eye(d) - u, 2)
        delta = real * rng.uniform(1.01, 1.3)
        gamma = np.linalg.norm(p @ u @ psi) * rng.uniform(0.7, 1.0)
        if delta**2 >= 2 * gamma * npsi:
            continue
        if corner_beta(gamma, npsi, delta) * delta >= 2:
            continue
        return u, p, psi, gamma, delta


def s_ball_circle(
    d: int,
    rank: int,
    weight: float,
    t_level: float,
    delta: float,
    rng: np.random.Generator,
    vertices: int = 17,
    radius: float = 0.9,
) -> tuple[UnitaryFamily, SBall]:
    """A loop of unitaries ``exp(i r delta (cos 2 pi x H_1 + sin 2 pi x H_2))`` and the ball data.

    ``psi`` has weight ``weight`` on a random rank-``rank`` projection.
    Members are not guaranteed to lie in ``S``; callers check.
    """
    w = haar_unitary(d, rng)
    p = w[:, :rank] @ dagger(w[:, :rank])
    p = 0.5 * (p + dagger(p))
    a = w[:, :rank] @ random_unit_vector(rank, rng)
    b = w[:, rank:] @ random_unit_vector(d - rank, rng)
    psi = np.sqrt(weight) * a + np.sqrt(1 - weight) * b
    h1 = random_hermitian(d, rng, 1 / np.sqrt(2))
    h2 = random_hermitian(d, rng, 1 / np.sqrt(2))
    xs = np.arange(vertices) / vertices
    members = [
        unitary_exp(radius * delta * (np.cos(2 * np.pi * x) * h1 + np.sin(2 * np.pi * x) * h2)) for x in xs
    ]
    return UnitaryFamily.circle(members), SBall(psi, Projection(AlgebraShape((d,)), p), t_level, delta)


def r_family(
    d: int, zeta: float, t_level: float, rng: np.random.Generator, members: int = 9
):
    """An ``RSet`` and a family inside ``B_zeta(1)`` intersected with it."""
    basis = haar_unitary(d, rng)
    omega, phi = basis[:, 0], basis[:, 1]
    a0 = rng.uniform(max(np.sqrt(t_level), 0.2) + 0.05, 0.9)
    psi = a0 * omega + np.sqrt(1 - a0**2) * phi
    rset = RSet(psi, omega, phi, t_level)
    alpha0 = np.arccos(a0)
    out = []
    for _ in range(members):
        # Rotate psi inside span{omega, phi}, then perturb on the orthogonal complement of psi.
        eps = rng.uniform(-0.3, 0.3) * zeta
        a = np.cos(alpha0 + eps)
        if a < np.sqrt(t_level):
            a = np.sqrt(t_level)
        y = a * omega + np.sqrt(1 - a * a) * phi
        g = geodesic_unitary(psi, y).unitary
        k = random_hermitian(d, rng)
        proj = np.eye(d) - np.outer(psi, psi.conj())
        k = proj @ k @ proj
        k *= 0.3 * zeta / np.linalg.norm(k, 2)
        out.append(g @ unitary_exp(k))
    return rset, out
