"""Metric quantities: embeddings, volumes, diameters, edge classes, objective.

An edge between two cell vertices has lattice difference vector w (taken
componentwise absolute); its embedded length is sqrt(sum w_i^2 p_i^2).  The
edge classes a d-cell can possibly carry are

    W_hat(d):  w_k = k, w_i = 0 for i < k, w_j in {1, ..., j-1} for j > k,

for some pivot level k, and the d componentwise-maximal ones among them are

    W(d):      w_k = k, w_i = 0 for i < k, w_j = j - 1 for j > k,

labeled by k = first nonzero coordinate.  D_k(p) is the length of the W(d)
class with pivot k and D(p) their maximum; the shape objective is

    F(p) = prod(p_i) / D(p)^d,

0-homogeneous in p, and equal to the minimum of prod/len^d over W_hat(d)
because the W rows dominate the rest componentwise.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .params import ParamVector, as_param_vector
from .tessellation import LatticeVertex, Mesh, SimplexCell

_INT64_MIN = -(2**63)
_INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class EdgeClass:
    """Per-axis absolute lattice difference of an edge."""

    w: tuple[int, ...]

    def __post_init__(self) -> None:
        w = tuple(int(v) for v in self.w)
        object.__setattr__(self, "w", w)
        if any(v < 0 for v in w):
            raise ValueError(f"edge class must be nonnegative, got {w}")
        if not any(w):
            raise ValueError("edge class must have a nonzero component")

    @property
    def d(self) -> int:
        return len(self.w)


@dataclass
class RegularityReport:
    """Worst-cell shape ratio of a mesh and its comparison against the
    standard cube-corner partition of the unit cube."""

    worst_theta: float
    worst_cell_index: tuple[int, ...]
    max_diameter: float
    volume: float
    kuhn_theta: float
    ratio_vs_kuhn: float


# ---------------------------------------------------------------------------
# embeddings and per-cell geometry
# ---------------------------------------------------------------------------


def embed(v: LatticeVertex, p: ParamVector) -> np.ndarray:
    """Metric coordinates x_i = z_i * p_i."""
    if len(v.z) != p.d:
        raise ValueError(f"vertex dimension {len(v.z)} != parameter dimension {p.d}")
    return np.asarray(v.z, dtype=float) * np.asarray(p.p)


def embed_all(mesh: Mesh, p: ParamVector) -> np.ndarray:
    """(n_vertices, d) float array of embedded coordinates."""
    if mesh.dim != p.d:
        raise ValueError(f"mesh dimension {mesh.dim} != parameter dimension {p.d}")
    return mesh.lattice.astype(float) * np.asarray(p.p)


def _edge_matrix(cell: SimplexCell, mesh: Mesh) -> list[list[int]]:
    ids = cell.vertex_ids
    verts = mesh.lattice[list(ids)]
    return [[int(verts[i + 1, j] - verts[0, j]) for j in range(mesh.dim)] for i in range(mesh.dim)]


def _checked64(v: int) -> int:
    if not _INT64_MIN <= v <= _INT64_MAX:
        raise OverflowError(f"integer determinant overflows 64-bit range: {v}")
    return v


def lattice_volume_det(cell: SimplexCell, mesh: Mesh) -> int:
    """Exact integer determinant of the lattice edge matrix of a cell.

    Fraction-free (Bareiss) elimination with row pivoting; every intermediate
    is checked against the 64-bit range and overflow raises instead of
    wrapping.  Built cells give +-d!.
    """
    d = mesh.dim
    m = _edge_matrix(cell, mesh)
    sign = 1
    prev = 1
    for k in range(d):
        pivot = next((r for r in range(k, d) if m[r][k] != 0), None)
        if pivot is None:
            return 0
        if pivot != k:
            m[k], m[pivot] = m[pivot], m[k]
            sign = -sign
        for i in range(k + 1, d):
            for j in range(k + 1, d):
                num = _checked64(m[i][j] * m[k][k]) - _checked64(m[i][k] * m[k][j])
                m[i][j] = _checked64(num // prev)
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[d - 1][d - 1]


def batch_det(edges: np.ndarray) -> np.ndarray:
    """Determinants of a (m, d, d) batch by cofactor expansion over column
    subsets (O(d 2^d) vectorized ops; exact on integer input).

    Entries of built cells are lattice differences bounded by d, so minors
    stay far below the int64 range for any batchable dimension.
    """
    m, d, d2 = edges.shape
    if d != d2:
        raise ValueError(f"edge batch must be square, got {edges.shape}")
    # minors[mask] = det of the last popcount(mask) rows on the columns in mask
    minors: dict[int, np.ndarray] = {0: np.ones(m, dtype=edges.dtype)}
    for size in range(1, d + 1):
        row = d - size
        level: dict[int, np.ndarray] = {}
        for mask in (s for s in range(1 << d) if bin(s).count("1") == size):
            acc: np.ndarray | None = None
            sign = 1
            for c in range(d):
                if not mask & (1 << c):
                    continue
                term = edges[:, row, c] * minors[mask ^ (1 << c)]
                if acc is None:
                    acc = term if sign > 0 else -term
                else:
                    acc += term if sign > 0 else -term
                sign = -sign
            level[mask] = acc  # type: ignore[assignment]
        minors = level
    return minors[(1 << d) - 1]


def lattice_volume_dets(mesh: Mesh) -> np.ndarray:
    """Exact integer determinants for every cell at once."""
    return batch_det(cell_edge_vectors(mesh)).astype(np.int64)


def cell_edge_vectors(mesh: Mesh) -> np.ndarray:
    """(m, d, d) integer lattice edge matrices (vertex k+1 minus vertex 0).

    int32 suffices: within a cell the level-l coordinates differ by at most
    l, and determinant minors stay below k! * d^k << 2^31 for d <= 7.
    """
    dtype = np.int32 if mesh.dim <= 7 else np.int64
    verts = mesh.lattice.astype(dtype)[mesh.cells]
    return verts[:, 1:, :] - verts[:, :1, :]


def cell_volume(cell: SimplexCell, mesh: Mesh, p: ParamVector) -> float:
    """|det| / d! * prod(p_i); equals prod(p_i) for every built cell."""
    det = lattice_volume_det(cell, mesh)
    if det == 0:
        raise ValueError(f"degenerate cell {cell.index}: zero lattice determinant")
    return abs(det) / math.factorial(mesh.dim) * p.product()


def cell_diameter(cell: SimplexCell, mesh: Mesh, p: ParamVector) -> float:
    """Max vertex-pair distance (simplex diameters are attained at vertices)."""
    x = mesh.lattice[list(cell.vertex_ids)].astype(float) * np.asarray(p.p)
    best = 0.0
    for a, b in itertools.combinations(range(len(cell.vertex_ids)), 2):
        diff = x[a] - x[b]
        best = max(best, float(diff @ diff))
    return math.sqrt(best)


def cell_diameters(mesh: Mesh, p: ParamVector) -> np.ndarray:
    """Diameter of every cell at once."""
    x = embed_all(mesh, p)
    best = np.zeros(mesh.n_cells)
    for a, b in itertools.combinations(range(mesh.dim + 1), 2):
        diff = x[mesh.cells[:, a]] - x[mesh.cells[:, b]]
        np.maximum(best, np.einsum("ij,ij->i", diff, diff), out=best)
    return np.sqrt(best)


def theta(cell: SimplexCell, mesh: Mesh, p: ParamVector) -> float:
    """Shape ratio volume / diameter^d (similarity to the equilateral simplex)."""
    if mesh.dim < 2:
        raise ValueError("shape ratio is defined for d >= 2")
    return cell_volume(cell, mesh, p) / cell_diameter(cell, mesh, p) ** mesh.dim


def thetas(mesh: Mesh, p: ParamVector) -> np.ndarray:
    """Shape ratio of every cell at once."""
    if mesh.dim < 2:
        raise ValueError("shape ratio is defined for d >= 2")
    volumes = np.abs(lattice_volume_dets(mesh)) / math.factorial(mesh.dim) * p.product()
    return volumes / cell_diameters(mesh, p) ** mesh.dim


# ---------------------------------------------------------------------------
# edge-class candidate sets and the shape objective
# ---------------------------------------------------------------------------


def w_matrix(d: int) -> np.ndarray:
    """(d, d) int array; row k-1 is the dominating class with pivot k."""
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    w = np.zeros((d, d), dtype=np.int64)
    for k in range(1, d + 1):
        w[k - 1, k - 1] = k
        for j in range(k + 1, d + 1):
            w[k - 1, j - 1] = j - 1
    return w


@functools.lru_cache(maxsize=None)
def _w_squares(d: int) -> np.ndarray:
    """Read-only float copy of w_matrix(d)**2 for the objective hot path."""
    sq = w_matrix(d).astype(float) ** 2
    sq.setflags(write=False)
    return sq


@functools.lru_cache(maxsize=None)
def _w_hat_squares(d: int) -> np.ndarray:
    sq = w_hat_matrix(d).astype(float) ** 2
    sq.setflags(write=False)
    return sq


def w_hat_matrix(d: int) -> np.ndarray:
    """All candidate classes: pivot k, then any w_j in {1, ..., j-1} after it."""
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    rows = []
    for k in range(1, d + 1):
        tail_choices = [range(1, j) for j in range(k + 1, d + 1)]
        for tail in itertools.product(*tail_choices):
            rows.append([0] * (k - 1) + [k] + list(tail))
    return np.asarray(rows, dtype=np.int64)


def enumerate_W(d: int) -> list[EdgeClass]:
    return [EdgeClass(tuple(row)) for row in w_matrix(d).tolist()]


def enumerate_W_hat(d: int) -> list[EdgeClass]:
    return [EdgeClass(tuple(row)) for row in w_hat_matrix(d).tolist()]


def D_j(p: ParamVector, w: EdgeClass) -> float:
    """Embedded length of one edge class."""
    if w.d != p.d:
        raise ValueError(f"edge class dimension {w.d} != parameter dimension {p.d}")
    return math.sqrt(sum((wi * pi) ** 2 for wi, pi in zip(w.w, p.p)))


def D_max(p: ParamVector) -> tuple[float, int]:
    """Largest diameter candidate over W(d) and its pivot label k (ties: smallest k)."""
    d = p.d
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    sq = _w_squares(d) @ (np.asarray(p.p) ** 2)
    k = int(np.argmax(sq)) + 1  # argmax returns the first maximum
    return math.sqrt(float(sq[k - 1])), k


def objective_F(p: ParamVector | Sequence[float]) -> float:
    """Shape objective prod(p_i) / D(p)^d; 0-homogeneous."""
    pv = as_param_vector(p)
    if pv.d < 2:
        raise ValueError(f"need d >= 2, got {pv.d}")
    diameter, _ = D_max(pv)
    return pv.product() / diameter**pv.d


def objective_F_candidates(p: ParamVector | Sequence[float]) -> float:
    """Same objective as the minimum over the full candidate set W_hat(d).

    Kept as an independent route: componentwise domination makes it equal to
    :func:`objective_F`, which tests assert.
    """
    pv = as_param_vector(p)
    if pv.d < 2:
        raise ValueError(f"need d >= 2, got {pv.d}")
    sq = _w_hat_squares(pv.d) @ (np.asarray(pv.p) ** 2)
    return float(np.min(pv.product() / sq ** (pv.d / 2.0)))


def objective_F_batch(q: np.ndarray, d: int) -> np.ndarray:
    """Objective over a batch of (p_2, ..., p_d) rows with p_1 fixed to 1."""
    q = np.atleast_2d(np.asarray(q, dtype=float))
    if q.shape[1] != d - 1:
        raise ValueError(f"expected {d - 1} free parameters, got {q.shape[1]}")
    full = np.concatenate([np.ones((q.shape[0], 1)), q], axis=1)
    dsq = (full**2) @ _w_squares(d).T
    return np.prod(full, axis=1) / np.max(dsq, axis=1) ** (d / 2.0)
