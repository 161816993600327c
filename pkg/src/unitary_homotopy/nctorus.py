"""Rational rotation algebras and the homotopy groups of their pure state spaces.

The algebra ``A_theta`` is generated by unitaries ``U, V`` with
``V U = exp(-2 pi i theta) U V``.  For ``theta = p/q`` every irreducible
representation is ``q``-dimensional and is, up to equivalence, the clock and
shift pair below, scaled by a point ``(z1, z2)`` of the 2-torus.  The shift
sends ``e_j`` to ``e_{j+1 mod q}``, which is the orientation that gives the
relation with this sign.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from math import gcd
from typing import Callable

import numpy as np

from .geodesic import as_state_vector, canonical_phase

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class RotationParams:
    p: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be positive")
        if self.q == 1:
            raise ValueError(
                "q = 1 is the commutative torus; use commutative_homotopy_groups for theta = 0"
            )
        if gcd(self.p, self.q) != 1:
            raise ValueError(f"p = {self.p} and q = {self.q} are not coprime")

    @property
    def theta(self) -> float:
        return self.p / self.q


def _unit(z, name: str) -> complex:
    z = complex(z)
    if abs(abs(z) - 1.0) > UNIT_TOL:
        raise ValueError(f"{name} = {z} is not of unit modulus")
    return z


def clock_shift(q: int, p: int = 1) -> tuple[np.ndarray, np.ndarray]:
    omega = np.exp(2j * np.pi * p / q)
    clock = np.diag(omega ** np.arange(q))
    shift = np.roll(np.eye(q, dtype=complex), 1, axis=0)
    return clock, shift


def irrep_at(params: RotationParams, z1, z2) -> tuple[np.ndarray, np.ndarray]:
    """The ``q``-dimensional representation at the torus point ``(z1, z2)``."""
    z1, z2 = _unit(z1, "z1"), _unit(z2, "z2")
    clock, shift = clock_shift(params.q, params.p)
    return z1 * clock, z2 * shift


def relation_residual(params: RotationParams, z1, z2) -> float:
    u, v = irrep_at(params, z1, z2)
    return float(np.linalg.norm(v @ u - np.exp(-2j * np.pi * params.theta) * u @ v, 2))


@dataclass(frozen=True)
class RotationAlgebraElement:
    """Finite sum ``sum c_mn U^m V^n``."""

    params: RotationParams
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {(int(m), int(n)): complex(c) for (m, n), c in self.terms.items() if c != 0}
        object.__setattr__(self, "terms", clean)

    @classmethod
    def unit(cls, params: RotationParams) -> "RotationAlgebraElement":
        return cls(params, {(0, 0): 1.0})

    @classmethod
    def monomial(cls, params: RotationParams, m: int, n: int, c: complex = 1.0) -> "RotationAlgebraElement":
        return cls(params, {(m, n): c})

    def _check(self, other: "RotationAlgebraElement") -> None:
        if other.params != self.params:
            raise ValueError("elements of different algebras")

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0) + c
        return RotationAlgebraElement(self.params, terms)

    def __neg__(self):
        return RotationAlgebraElement(self.params, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: complex) -> "RotationAlgebraElement":
        return RotationAlgebraElement(self.params, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        # (U^a V^b)(U^c V^d) = exp(-2 pi i theta b c) U^(a+c) V^(b+d)
        if not isinstance(other, RotationAlgebraElement):
            return self.scale(other)
        self._check(other)
        th = self.params.theta
        terms: dict = {}
        for (a, b), x in self.terms.items():
            for (c, d), y in other.terms.items():
                k = (a + c, b + d)
                terms[k] = terms.get(k, 0) + x * y * np.exp(-2j * np.pi * th * b * c)
        return RotationAlgebraElement(self.params, terms)

    __rmul__ = scale

    def adjoint(self) -> "RotationAlgebraElement":
        # (U^m V^n)* = V^-n U^-m = exp(-2 pi i theta m n) U^-m V^-n
        th = self.params.theta
        return RotationAlgebraElement(
            self.params,
            {(-m, -n): np.conj(c) * np.exp(-2j * np.pi * th * m * n) for (m, n), c in self.terms.items()},
        )


def evaluate_element(elem: RotationAlgebraElement, z1, z2) -> np.ndarray:
    u, v = irrep_at(elem.params, z1, z2)
    q = elem.params.q
    out = np.zeros((q, q), dtype=complex)
    for (m, n), c in elem.terms.items():
        out += c * np.linalg.matrix_power(u, m) @ np.linalg.matrix_power(v, n)
    return out


@dataclass(frozen=True, eq=False)
class BundlePoint:
    """A point of the torus together with a unit vector of ``C^q`` (a ray, in canonical phase)."""

    params: RotationParams
    z1: complex
    z2: complex
    ray: np.ndarray

    def __post_init__(self):
        _unit(self.z1, "z1")
        _unit(self.z2, "z2")
        ray = canonical_phase(as_state_vector(self.ray))
        if ray.size != self.params.q:
            raise ValueError(f"ray must lie in C^{self.params.q}")
        object.__setattr__(self, "ray", ray)


def pure_state_at(point: BundlePoint) -> Callable[[RotationAlgebraElement], complex]:
    """The vector state ``a -> <ray, pi_(z1, z2)(a) ray>``."""

    def state(elem: RotationAlgebraElement) -> complex:
        if elem.params != point.params:
            raise ValueError("element belongs to a different algebra")
        m = evaluate_element(elem, point.z1, point.z2)
        return complex(np.vdot(point.ray, m @ point.ray))

    return state


# ---------------------------------------------------------------------------
# Homotopy groups


@dataclass(frozen=True)
class HomotopyGroupResult:
    k: int
    value: str
    provenance: str
    resolved: str | None = None

    def to_dict(self) -> dict:
        return {"k": self.k, "value": self.value, "provenance": self.provenance, "resolved": self.resolved}


@lru_cache(maxsize=None)
def sphere_table() -> dict[tuple[int, int], str]:
    """External reference values of ``pi_k(S^m)`` for odd ``m`` and ``k <= m + 3``."""
    text = resources.files("unitary_homotopy").joinpath("data/sphere_homotopy.csv").read_text()
    rows = csv.DictReader(line for line in text.splitlines() if not line.startswith("#"))
    return {(int(r["m"]), int(r["k"])): r["group"] for r in rows}


def homotopy_groups(params: RotationParams, k: int, resolve: bool = False) -> HomotopyGroupResult:
    """``pi_k`` of the pure state space of ``A_{p/q}``; depends only on ``k`` and ``q``.

    Above ``2q - 1`` the answer is ``pi_k(S^{2q-1})``; with ``resolve`` it is
    looked up in the bundled sphere table when the table covers it.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    m = 2 * params.q - 1
    if k == 0:
        return HomotopyGroupResult(k, "0", "closed-form")
    if k == 1:
        return HomotopyGroupResult(k, "Z^2", "closed-form")
    if k == 2:
        return HomotopyGroupResult(k, "Z", "closed-form")
    if k < m:
        return HomotopyGroupResult(k, "0", "closed-form")
    if k == m:
        return HomotopyGroupResult(k, "Z", "closed-form")
    symbolic = f"pi_{k}(S^{m})"
    if resolve and (m, k) in sphere_table():
        return HomotopyGroupResult(k, symbolic, "sphere-table", sphere_table()[(m, k)])
    return HomotopyGroupResult(k, symbolic, "symbolic")


def homotopy_groups_irrational(k: int) -> HomotopyGroupResult:
    """For irrational ``theta`` every homotopy group of the pure state space vanishes."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return HomotopyGroupResult(k, "0", "closed-form")


def commutative_homotopy_groups(k: int) -> HomotopyGroupResult:
    """``theta = 0``: the pure states form the 2-torus, so only ``pi_1 = Z^2`` survives."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return HomotopyGroupResult(k, "Z^2" if k == 1 else "0", "closed-form")
