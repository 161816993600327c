"""Deforming families of pure states onto a product reference state.

A family is sampled on the vertices of a parameter complex.  Each level of
the iteration rotates every state, inside the corner cut out by the previous
projection, until it has full weight on the next projection.  Level ``i``
runs on the time window ``[1 - 2**(1 - i), 1 - 2**(-i)]``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .geodesic import inner
from .homotopy import GRID_POINTS, Obstruction, _grid, _pmap, sphere_rank_condition
from .mats import dagger, operator_norm, unitary_exp, unitary_exp_path
from .state import (
    AlgebraShape,
    Projection,
    PureState,
    act,
    corner_isometry,
    excision_projections,
    factor_vectors,
    move_distance,
    projection_generator,
)

CAPTURE_TOL = 1e-10
POSITIVE_OVERLAP_FLOOR = 1e-6
ROTATION_FLOOR = 1e-4
ROTATION_RAMP = 0.5
ROTATION_TRIES = 32
TAIL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class StateFamily:
    """Vector states on the vertices of a parameter complex.

    Attributes:
        shape: algebra shared by all states.
        vectors: array of shape (vertices, total_dim), canonical phase per row.
        edges: undirected adjacency of the parameter complex.
        dim: dimension of the parameter complex.
        base_vertex: the distinguished vertex.
    """

    shape: AlgebraShape
    vectors: np.ndarray
    edges: tuple[tuple[int, int], ...] = ()
    dim: int = 0
    base_vertex: int = 0

    def __post_init__(self):
        vecs = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        if vecs.shape[0] == 0:
            raise ValueError("family has no vertices")
        states = [PureState(self.shape, v) for v in vecs]
        vecs = np.stack([s.vector for s in states])
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)
        edges = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if not (0 <= a < len(vecs) and 0 <= b < len(vecs)):
                raise ValueError(f"edge ({a}, {b}) leaves the vertex set")
            if a != b:
                edges.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", tuple(sorted(edges)))
        if not 0 <= self.base_vertex < len(vecs):
            raise ValueError("base vertex is not a vertex")

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def states(self) -> list[PureState]:
        return [PureState(self.shape, v) for v in self.vectors]

    @property
    def base_state(self) -> PureState:
        return PureState(self.shape, self.vectors[self.base_vertex])

    @classmethod
    def circle(cls, shape: AlgebraShape, vectors, base_vertex: int = 0) -> "StateFamily":
        n = len(vectors)
        edges = tuple((k, (k + 1) % n) for k in range(n)) if n > 1 else ()
        return cls(shape, np.asarray(vectors), edges, 1 if n > 1 else 0, base_vertex)


def bloch_sphere_family(latitudes: int = 9, longitudes: int = 12) -> StateFamily:
    """Every pure state of the 2x2 matrices, sampled on a latitude/longitude grid.

    Vertex 0 is the north pole ``e_1``; the last vertex is the south pole ``e_2``.
    """
    if latitudes < 3 or longitudes < 3:
        raise ValueError("need at least 3 latitudes and 3 longitudes")
    vecs = [np.array([1.0, 0.0], dtype=complex)]
    rings = []
    for i in range(1, latitudes - 1):
        th = np.pi * i / (latitudes - 1)
        ring = []
        for j in range(longitudes):
            ph = 2 * np.pi * j / longitudes
            ring.append(len(vecs))
            vecs.append(np.array([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)]))
        rings.append(ring)
    vecs.append(np.array([0.0, 1.0], dtype=complex))
    south = len(vecs) - 1
    edges = []
    for ring in rings:
        edges += [(ring[j], ring[(j + 1) % longitudes]) for j in range(longitudes)]
    edges += [(0, k) for k in rings[0]] + [(k, south) for k in rings[-1]]
    for upper, lower in zip(rings, rings[1:]):
        for j in range(longitudes):
            edges += [(upper[j], lower[j]), (upper[j], lower[(j + 1) % longitudes])]
    return StateFamily(AlgebraShape((2,)), np.stack(vecs), tuple(edges), 2, 0)


def loop_family(shape: AlgebraShape, reference: PureState, vertices: int, seed: int = 0, scale: float = 1.0) -> StateFamily:
    """A closed loop of states through ``reference``.

    Vertex ``x`` carries ``exp(i((cos 2 pi x - 1) H_1 + sin 2 pi x H_2)) reference``
    with fixed random Hermitian ``H_1, H_2`` of norm ``scale``.
    """
    if vertices < 1:
        raise ValueError("family needs at least one vertex")
    rng = np.random.default_rng(seed)
    d = shape.total_dim
    hs = []
    for _ in range(2):
        z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = 0.5 * (z + dagger(z))
        hs.append(h * scale / operator_norm(h))
    xs = np.arange(vertices) / vertices
    vecs = [unitary_exp((np.cos(2 * np.pi * x) - 1) * hs[0] + np.sin(2 * np.pi * x) * hs[1]) @ reference.vector for x in xs]
    return StateFamily.circle(shape, vecs, 0)


# ---------------------------------------------------------------------------
# One projection


@dataclass(frozen=True, eq=False)
class ProjectionDeformation:
    """Unitaries ``U(x, t)`` with ``U(x, 0) = 1`` moving each state onto ``P``.

    ``unitaries`` has shape (vertices, times, d, d).
    """

    times: np.ndarray
    unitaries: np.ndarray
    branch: str
    overlaps_before: np.ndarray
    overlaps_after: np.ndarray
    norm_bounds: np.ndarray | None
    realized_norms: np.ndarray
    details: dict = field(default_factory=dict)

    @property
    def end(self) -> np.ndarray:
        return self.unitaries[:, -1]


def _overlaps(vecs: np.ndarray, pm: np.ndarray) -> np.ndarray:
    return np.linalg.norm(vecs @ pm.T, axis=1) ** 2


def _move_paths(vecs: np.ndarray, pm: np.ndarray, captured: np.ndarray, grid: np.ndarray, workers) -> np.ndarray:
    d = pm.shape[0]

    def one(k):
        if captured[k]:
            return np.broadcast_to(np.eye(d, dtype=complex), (grid.size, d, d)).copy()
        return unitary_exp_path(projection_generator(vecs[k], pm), grid)

    return np.stack(_pmap(one, list(range(len(vecs))), workers))


def _offdiagonal_hermitian(pm: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    d = pm.shape[0]
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    qm = np.eye(d) - pm
    x = pm @ z @ qm
    k = x + dagger(x)
    n = operator_norm(k)
    return k / n if n > 0 else k


def deform_family_onto_projection(
    family: StateFamily,
    p: Projection,
    grid=None,
    seed: int = 0,
    overlap_floor: float = POSITIVE_OVERLAP_FLOOR,
    workers: int | None = None,
) -> ProjectionDeformation:
    """Unitary field ``U(x, t)`` with ``U(x, 0) = 1`` and ``U(x, 1) psi_x`` in the range of ``P``.

    If every state has weight above ``overlap_floor`` on ``P``, each vertex
    follows the shortest rotation onto ``P psi_x / ||P psi_x||``, and vertices
    already captured by ``P`` stay at the identity.  Otherwise, when the
    family dimension ``n`` and the rank ``r`` of ``P`` satisfy ``n <= 2r - 2``,
    the first half of the time interval applies ``exp(i t c_x K)`` for a fixed
    Hermitian ``K`` exchanging the ranges of ``P`` and ``1 - P``.  The weight
    ``c_x`` ramps from 1 at zero overlap to 0 at overlap 1/2.  The second half
    then runs the shortest rotations.

    Raises:
        Obstruction: if neither construction applies.
        ValueError: on a shape mismatch.
    """
    if p.shape != family.shape:
        raise ValueError(f"shape mismatch: {family.shape} vs {p.shape}")
    grid = _grid(grid)
    pm = p.matrix
    d = pm.shape[0]
    vecs = family.vectors
    w = _overlaps(vecs, pm)
    captured = w >= 1.0 - CAPTURE_TOL
    details: dict = {"corner_rank": p.rank, "family_dim": family.dim}
    if np.all(w > overlap_floor):
        branch = "positive_overlap"
        times = grid
        field_ = _move_paths(vecs, pm, captured, grid, workers)
        bounds = np.array([move_distance(v, pm) for v in vecs])
    else:
        r = p.rank
        if not sphere_rank_condition(family.dim, r):
            raise Obstruction(
                {
                    "reason": "rank_condition",
                    "message": (
                        f"some states have no weight on P and the family dimension {family.dim} exceeds "
                        f"2r - 2 = {2 * r - 2} for rank r = {r}"
                    ),
                    "family_dim": family.dim,
                    "corner_rank": r,
                    "condition": "family_dim <= 2 * corner_rank - 2",
                    "min_overlap": float(w.min()),
                }
            )
        branch = "generic_rotation"
        ramp = np.clip(1.0 - w / ROTATION_RAMP, 0.0, 1.0)
        ramp[captured] = 0.0
        rng = np.random.default_rng(seed)
        best_k, best_min = None, -1.0
        for _ in range(ROTATION_TRIES):
            k = _offdiagonal_hermitian(pm, rng)
            rotated = np.stack([unitary_exp(c * k) @ v for c, v in zip(ramp, vecs)])
            m = float(_overlaps(rotated, pm).min())
            if m > best_min:
                best_k, best_min = k, m
        if best_min < ROTATION_FLOOR:
            raise Obstruction(
                {
                    "reason": "rotation_search_failed",
                    "message": f"no sampled rotation lifts every overlap above {ROTATION_FLOOR}",
                    "best_min_overlap": best_min,
                    "family_dim": family.dim,
                    "corner_rank": r,
                }
            )
        first = np.stack([unitary_exp_path(c * best_k, grid) for c in ramp])
        mid = first[:, -1]
        moved = np.einsum("nij,nj->ni", mid, vecs)
        w_mid = _overlaps(moved, pm)
        second = _move_paths(moved, pm, w_mid >= 1.0 - CAPTURE_TOL, grid, workers) @ mid[:, None]
        times = np.concatenate([grid / 2, 0.5 + grid[1:] / 2])
        field_ = np.concatenate([first, second[:, 1:]], axis=1)
        bounds = None
        details["rotation_min_overlap"] = best_min
        details["rotation_generator_norm"] = 1.0
    ends = np.einsum("nij,nj->ni", field_[:, -1], vecs)
    after = _overlaps(ends, pm)
    eye = np.eye(d)
    realized = np.linalg.norm(eye - field_, 2, axis=(2, 3)).max(axis=1)
    return ProjectionDeformation(times, field_, branch, w, after, bounds, realized, details)


# ---------------------------------------------------------------------------
# Iteration over the excising projections


@dataclass(frozen=True, eq=False)
class LevelRecord:
    level: int
    window: tuple[float, float]
    corner_rank: int
    projection_rank: int
    branch: str
    min_overlap_before: float
    max_capture_defect: float
    max_corner_defect: float
    max_norm: float
    norm_bounds: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "window": list(self.window),
            "corner_rank": self.corner_rank,
            "projection_rank": self.projection_rank,
            "branch": self.branch,
            "min_overlap_before": self.min_overlap_before,
            "max_capture_defect": self.max_capture_defect,
            "max_corner_defect": self.max_corner_defect,
            "max_norm": self.max_norm,
            "norm_bounds": None if self.norm_bounds is None else list(self.norm_bounds),
        }


@dataclass(frozen=True, eq=False)
class HomotopyTrace:
    """Sampled unitary field ``V(x, t)`` for ``t < 1``; at ``t = 1`` every vertex is the reference.

    ``unitaries`` has shape (vertices, times, d, d).  ``levels[k]`` is the
    level whose window contains ``times[k]`` (0 for ``t = 0``, ``depth + 1``
    for the tail after the last window).
    """

    shape: AlgebraShape
    edges: tuple[tuple[int, int], ...]
    base_vertex: int
    depth: int
    times: np.ndarray
    levels: np.ndarray
    unitaries: np.ndarray
    initial_vectors: np.ndarray
    reference: np.ndarray
    level_products: np.ndarray
    records: tuple[LevelRecord, ...]

    def vectors_at(self, k: int) -> np.ndarray:
        return np.einsum("nij,nj->ni", self.unitaries[:, k], self.initial_vectors)

    def evaluate(self, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Returns times including ``t = 1`` and the values ``H(x, t)(B)`` (vertices x times)."""
        b = np.asarray(b, dtype=complex)
        ys = np.einsum("ntij,nj->nti", self.unitaries, self.initial_vectors)
        vals = np.einsum("nti,ij,ntj->nt", ys.conj(), b, ys)
        ref = inner(self.reference, b @ self.reference)
        vals = np.concatenate([vals, np.full((vals.shape[0], 1), ref)], axis=1)
        return np.append(self.times, 1.0), vals

    def state(self, vertex: int, k: int) -> PureState:
        """``H(x, t_k)`` through the unitary action."""
        if k == len(self.times):
            return PureState(self.shape, self.reference)
        return act(self.unitaries[vertex, k], PureState(self.shape, self.initial_vectors[vertex]))

    def to_dict(self, observables: dict[str, np.ndarray] | None = None, include_unitaries: bool = False) -> dict:
        out = {
            "format": "homotopy-trace",
            "version": 1,
            "factor_dims": list(self.shape.factor_dims),
            "vertices": int(len(self.initial_vectors)),
            "edges": [list(e) for e in self.edges],
            "base_vertex": self.base_vertex,
            "depth": self.depth,
            "times": [float(t) for t in np.append(self.times, 1.0)],
            "levels": [int(x) for x in self.levels] + [self.depth + 1],
            "schedule": [r.to_dict() for r in self.records],
            "observables": {},
        }
        for name, b in (observables or {}).items():
            _, vals = self.evaluate(b)
            out["observables"][name] = {"real": vals.real.tolist(), "imag": vals.imag.tolist()}
        if include_unitaries:
            out["unitaries"] = {"real": self.unitaries.real.tolist(), "imag": self.unitaries.imag.tolist()}
        return out

    def observable_rows(self, observables: dict[str, np.ndarray]) -> list[tuple]:
        rows = []
        for name, b in observables.items():
            ts, vals = self.evaluate(b)
            for x in range(vals.shape[0]):
                for k, t in enumerate(ts):
                    rows.append((x, float(t), name, float(vals[x, k].real)))
        return rows


def write_csv(rows: Iterable[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def iterate_contraction(
    family: StateFamily,
    reference: PureState,
    depth: int,
    grid=None,
    tail_points: int = 5,
    seed: int = 0,
    workers: int | None = None,
) -> HomotopyTrace:
    """Composes the level deformations on the dyadic schedule.

    ``V(x, t) = U_i(x, s) U_{i-1}(x, 1) ... U_1(x, 1)`` on level ``i``'s
    window, where ``U_i`` acts on the corner of ``P_{i-1}`` and as the
    identity on its complement.

    Raises:
        Obstruction: with the level index in its report.
        ValueError: for a non-product reference, a base state different from
            the reference, or a depth larger than the number of factors.
    """
    shape = family.shape
    if reference.shape != shape:
        raise ValueError("reference and family have different shapes")
    if not 0 <= depth <= shape.num_factors:
        raise ValueError(f"depth must lie in [0, {shape.num_factors}]")
    factor_vectors(shape, reference)
    if abs(inner(reference.vector, family.vectors[family.base_vertex])) < 1.0 - 1e-10:
        raise ValueError("base state differs from the reference")
    grid = _grid(grid if grid is not None else GRID_POINTS)
    projs = excision_projections(shape, reference)
    n, d = len(family), shape.total_dim
    eye = np.eye(d, dtype=complex)
    prod = np.broadcast_to(eye, (n, d, d)).copy()
    vecs = family.vectors.copy()
    times, levels, fields = [np.array([0.0])], [np.array([0])], [prod[:, None].copy()]
    prev = eye
    products, records = [], []
    for i in range(1, depth + 1):
        pi = projs[i - 1].matrix
        iso = corner_isometry(prev)
        r = iso.shape[1]
        cshape = AlgebraShape((r,))
        cvecs = vecs @ iso.conj()
        cvecs = cvecs / np.linalg.norm(cvecs, axis=1, keepdims=True)
        cfam = StateFamily(cshape, cvecs, family.edges, family.dim, family.base_vertex)
        cproj = Projection(cshape, dagger(iso) @ pi @ iso)
        try:
            dfm = deform_family_onto_projection(cfam, cproj, grid, seed=seed + i, workers=workers)
        except Obstruction as exc:
            exc.report["level"] = i
            raise
        # Corner unitaries embedded as W + (1 - P_{i-1}).
        full = iso @ dfm.unitaries @ dagger(iso) + (eye - prev)
        a, b = 1.0 - 2.0 ** (1 - i), 1.0 - 2.0 ** (-i)
        s = dfm.times[1:]
        times.append(a + s * (b - a))
        times[-1][-1] = b
        levels.append(np.full(s.size, i))
        fields.append(full[:, 1:] @ prod[:, None])
        prod = fields[-1][:, -1].copy()
        products.append(prod.copy())
        vecs = np.einsum("nij,nj->ni", prod, family.vectors)
        capture = np.abs(1.0 - _overlaps(vecs, pi)).max()
        corner_defect = max(
            operator_norm(u - (prev @ u @ prev + eye - prev)) for u in full.reshape(-1, d, d)
        )
        records.append(
            LevelRecord(
                i,
                (a, b),
                r,
                projs[i - 1].rank,
                dfm.branch,
                float(dfm.overlaps_before.min()),
                float(capture),
                float(corner_defect),
                float(dfm.realized_norms.max()),
                None if dfm.norm_bounds is None else tuple(float(x) for x in dfm.norm_bounds),
            )
        )
        prev = pi
    start = 1.0 - 2.0 ** (-depth)
    if tail_points > 0:
        tail = start + (1.0 - start) * np.arange(1, tail_points + 1) / (tail_points + 1)
        times.append(tail)
        levels.append(np.full(tail.size, depth + 1))
        fields.append(np.repeat(prod[:, None], tail.size, axis=1))
    return HomotopyTrace(
        shape=shape,
        edges=family.edges,
        base_vertex=family.base_vertex,
        depth=depth,
        times=np.concatenate(times),
        levels=np.concatenate(levels),
        unitaries=np.concatenate(fields, axis=1),
        initial_vectors=family.vectors.copy(),
        reference=reference.vector.copy(),
        level_products=np.stack(products) if products else np.empty((0, n, d, d), dtype=complex),
        records=tuple(records),
    )


@dataclass(frozen=True)
class ObservableCheck:
    name: str
    support_depth: int
    guaranteed: bool
    window_start: float
    max_tail_deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return (not self.guaranteed) or self.max_tail_deviation <= self.tol

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "support_depth": self.support_depth,
            "guaranteed": self.guaranteed,
            "window_start": self.window_start,
            "max_tail_deviation": self.max_tail_deviation,
            "tol": self.tol,
            "passed": self.passed,
            "note": None if self.guaranteed else "no tail guarantee beyond the realized depth",
        }


def weak_star_convergence_check(
    trace: HomotopyTrace,
    family: StateFamily,
    observables: Sequence[tuple],
    tol: float = TAIL_TOL,
) -> list[ObservableCheck]:
    """Tail deviations ``|H(x, t)(B) - psi_{x0}(B)|`` for ``t >= 1 - 2**(-n-1)``.

    ``observables`` holds ``(B, n)`` or ``(name, B, n)`` entries, where ``B``
    is supported in the first ``n`` factors.  Observables with ``n`` beyond
    the trace depth are evaluated but carry no guarantee.

    Raises:
        ValueError: if ``n`` exceeds the number of tensor factors.
    """
    base = family.vectors[family.base_vertex]
    out = []
    for j, item in enumerate(observables):
        name, b, n = item if len(item) == 3 else (f"B{j}", *item)
        if not 0 <= n <= trace.shape.num_factors:
            raise ValueError(f"support depth {n} exceeds the {trace.shape.num_factors} tensor factors")
        ts, vals = trace.evaluate(b)
        target = inner(base, np.asarray(b, dtype=complex) @ base)
        start = 1.0 - 2.0 ** (-n - 1)
        mask = ts >= start
        dev = float(np.abs(vals[:, mask] - target).max()) if mask.any() else 0.0
        out.append(ObservableCheck(name, int(n), n <= trace.depth, start, dev, tol))
    return out
