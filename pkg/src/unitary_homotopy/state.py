"""Vector states on finite tensor products of matrix algebras.

A vector state on a full matrix algebra has the identity representation as
its GNS representation, so states are stored as unit vectors and unitaries act
on them by matrix multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .geodesic import as_state_vector, canonical_phase, geodesic_unitary, inner
from .mats import UNITARY_TOL, dagger, is_unitary, operator_norm, unitary_exp

PROJECTION_TOL = 1e-10
PRODUCT_TOL = 1e-10
OVERLAP_FLOOR = 1e-10
CAPTURE_TOL = 1e-10


class ZeroOverlapError(ValueError):
    """The state has (numerically) no weight on the projection."""


@dataclass(frozen=True)
class AlgebraShape:
    factor_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"factor dimensions must be positive, got {self.factor_dims}")
        object.__setattr__(self, "factor_dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.factor_dims))

    @property
    def num_factors(self) -> int:
        return len(self.factor_dims)

    def embed(self, local: np.ndarray, first: int = 0) -> np.ndarray:
        """Places an operator on factors ``first, first+1, ...`` into the full algebra."""
        local = np.asarray(local, dtype=complex)
        dims = self.factor_dims
        k, size = first, 1
        while size < local.shape[0] and k < len(dims):
            size *= dims[k]
            k += 1
        if size != local.shape[0]:
            raise ValueError("operator size does not match a block of consecutive factors")
        left = int(np.prod(dims[:first]))
        right = int(np.prod(dims[k:]))
        return np.kron(np.kron(np.eye(left), local), np.eye(right))


@dataclass(frozen=True, eq=False)
class PureState:
    """A vector state ``A -> <psi, A psi>``, stored in canonical phase."""

    shape: AlgebraShape
    vector: np.ndarray

    def __post_init__(self):
        v = as_state_vector(self.vector)
        if v.size != self.shape.total_dim:
            raise ValueError(f"vector length {v.size} does not match algebra dimension {self.shape.total_dim}")
        v = canonical_phase(v)
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @classmethod
    def from_vector(cls, vector, shape: AlgebraShape | None = None) -> "PureState":
        vector = np.asarray(vector, dtype=complex)
        return cls(shape or AlgebraShape((vector.size,)), vector)

    def __call__(self, a: np.ndarray) -> complex:
        a = np.asarray(a, dtype=complex)
        if a.shape != (self.shape.total_dim,) * 2:
            raise ValueError("observable shape does not match the algebra")
        return inner(self.vector, a @ self.vector)

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())


@dataclass(frozen=True, eq=False)
class Projection:
    shape: AlgebraShape
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.shape.total_dim
        if m.shape != (n, n):
            raise ValueError(f"projection must be {n}x{n}, got {m.shape}")
        if operator_norm(m - dagger(m)) > PROJECTION_TOL or operator_norm(m @ m - m) > PROJECTION_TOL:
            raise ValueError("matrix is not an orthogonal projection within tolerance")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix).real))

    def complement(self) -> "Projection":
        return Projection(self.shape, np.eye(self.shape.total_dim) - self.matrix)

    def isometry(self) -> np.ndarray:
        return corner_isometry(self.matrix)


def corner_isometry(p: np.ndarray) -> np.ndarray:
    """Columns form an orthonormal basis of the range of ``p``.

    Diagonal 0/1 projections use standard basis vectors; others use an
    eigenbasis.
    """
    p = np.asarray(p, dtype=complex)
    diag = np.diag(p).real
    off = p - np.diag(np.diag(p))
    if not np.any(off) and np.all((np.abs(diag) < 1e-14) | (np.abs(diag - 1) < 1e-14)):
        idx = np.flatnonzero(diag > 0.5)
        return np.eye(p.shape[0], dtype=complex)[:, idx]
    w, v = np.linalg.eigh(0.5 * (p + dagger(p)))
    return v[:, w > 0.5][:, ::-1]


def _check_shapes(psi: PureState, p: Projection) -> None:
    if psi.shape != p.shape:
        raise ValueError(f"shape mismatch: {psi.shape} vs {p.shape}")


def act(u: np.ndarray, psi: PureState, tol: float = UNITARY_TOL) -> PureState:
    """The state ``C -> psi(U* C U)``, realized by the vector ``U psi``."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (psi.shape.total_dim,) * 2:
        raise ValueError("unitary does not match the algebra dimension")
    if not is_unitary(u, tol):
        raise ValueError("only unitaries act on states")
    v = u @ psi.vector
    return PureState(psi.shape, v / np.linalg.norm(v))


def overlap(psi: PureState, p: Projection) -> float:
    """``psi(P) = ||P psi||^2``."""
    _check_shapes(psi, p)
    return float(np.linalg.norm(p.matrix @ psi.vector) ** 2)


def move_onto_projection(psi: PureState, p: Projection, floor: float = OVERLAP_FLOOR) -> np.ndarray:
    """Shortest rotation taking ``psi`` onto the normalized vector ``P psi / ||P psi||``.

    The result satisfies ``||1 - U|| = sqrt(2 - 2 sqrt(psi(P)))``.

    Raises:
        ZeroOverlapError: if ``psi(P) <= floor``.
    """
    return unitary_exp(projection_generator(psi.vector, p.matrix, floor))


def move_distance(psi: np.ndarray, p: np.ndarray) -> float:
    """``sqrt(2 - 2 sqrt(psi(P)))``, evaluated as ``sqrt(2 ||(1-P) psi||^2 / (1 + ||P psi||))``.

    The second form keeps full accuracy as ``psi(P)`` approaches 1.
    """
    pv = p @ psi
    qv = psi - pv
    return float(np.sqrt(2.0 * np.vdot(qv, qv).real / (1.0 + np.linalg.norm(pv))))


def projection_generator(psi: np.ndarray, p: np.ndarray, floor: float = OVERLAP_FLOOR) -> np.ndarray:
    """Geodesic generator from ``psi`` to ``P psi / ||P psi||`` for raw arrays."""
    pv = p @ psi
    w = float(np.linalg.norm(pv) ** 2)
    if w <= floor:
        raise ZeroOverlapError(f"overlap {w:.3e} is below {floor:.1e}")
    target = pv / np.sqrt(w)
    # <psi, P psi> is real up to rounding; remove the rounding explicitly.
    c = inner(psi, target)
    target = target * (abs(c) / c)
    return geodesic_unitary(psi, target).generator


@dataclass(frozen=True, eq=False)
class CornerState:
    """A state on the corner ``P A P`` realized on the range of ``P``.

    ``isometry`` has orthonormal columns spanning the range of ``P``; a corner
    element ``A`` is represented by ``isometry* A isometry``.
    """

    state: PureState
    isometry: np.ndarray

    def compress(self, a: np.ndarray) -> np.ndarray:
        return dagger(self.isometry) @ a @ self.isometry

    def expand(self, b: np.ndarray) -> np.ndarray:
        """Corner operator ``b`` as the ambient operator ``W b W*``."""
        return self.isometry @ b @ dagger(self.isometry)


def compress_state(
    psi: PureState, p: Projection, isometry: np.ndarray | None = None, tol: float = CAPTURE_TOL
) -> CornerState:
    """Restriction of ``psi`` to the corner ``P A P`` when ``psi(P) = 1``."""
    _check_shapes(psi, p)
    w = overlap(psi, p)
    if abs(1.0 - w) > tol:
        raise ValueError(f"state has weight {w} on the projection, expected 1")
    iso = corner_isometry(p.matrix) if isometry is None else np.asarray(isometry, dtype=complex)
    v = dagger(iso) @ psi.vector
    v = v / np.linalg.norm(v)
    return CornerState(PureState(AlgebraShape((iso.shape[1],)), v), iso)


def factor_vectors(shape: AlgebraShape, reference: PureState, tol: float = PRODUCT_TOL) -> list[np.ndarray]:
    """Per-factor unit vectors of a product state.

    Raises:
        ValueError: if some bipartition of the tensor factors has a second
            singular value above ``tol``.
    """
    if reference.shape != shape:
        raise ValueError("reference state has a different shape")
    dims = shape.factor_dims
    t = reference.vector.reshape(dims)
    for k in range(1, len(dims)):
        sv = np.linalg.svd(t.reshape(int(np.prod(dims[:k])), -1), compute_uv=False)
        if sv.size > 1 and sv[1] > tol:
            raise ValueError(f"reference is not a product state across cut {k} (sigma_2 = {sv[1]:.3e})")
    vectors = []
    for i in range(len(dims)):
        mat = np.moveaxis(t, i, 0).reshape(dims[i], -1)
        u, _, _ = np.linalg.svd(mat, full_matrices=False)
        vectors.append(canonical_phase(u[:, 0]))
    return vectors


def excision_projections(shape: AlgebraShape, reference: PureState) -> list[Projection]:
    """The decreasing projections ``E_1 x ... x E_n x 1`` for ``n = 1..m``.

    ``E_i`` projects onto the i-th factor vector of the product reference.
    """
    vecs = factor_vectors(shape, reference)
    dims = shape.factor_dims
    out = []
    for n in range(1, len(dims) + 1):
        local = reduce(np.kron, [np.outer(v, v.conj()) for v in vecs[:n]])
        rest = int(np.prod(dims[n:]))
        out.append(Projection(shape, np.kron(local, np.eye(rest))))
    return out


def excision_defect(p: Projection, a: np.ndarray, omega: PureState) -> float:
    """``||P A P - omega(A) P^2||``."""
    _check_shapes(omega, p)
    a = np.asarray(a, dtype=complex)
    if a.shape != p.matrix.shape:
        raise ValueError("observable does not match the projection")
    pm = p.matrix
    return operator_norm(pm @ a @ pm - omega(a) * (pm @ pm))
