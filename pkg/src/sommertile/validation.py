"""Structural checkers for built meshes plus the cube-corner reference.

Checks are exact where the property is exact: facet multiplicity and
coloring work on integer arrays, equivolume combines the exact integer
determinant with an independent floating re-measurement of the embedded
cells, and the reference partition volumes are summed in rational
arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .metrics import (
    EdgeClass,
    RegularityReport,
    batch_det,
    cell_diameters,
    cell_edge_vectors,
    lattice_volume_dets,
)
from .params import ParamVector, PermutationVector
from .tessellation import Mesh, Window, build, default_window

#: Relative tolerance for the floating re-measurement of cell volumes.
VOLUME_RTOL = 1e-12

#: Cap on d for the cube-corner partition (d! simplices).
KUHN_BUDGET_DIM = 9


# ---------------------------------------------------------------------------
# report fragments
# ---------------------------------------------------------------------------


@dataclass
class FaceToFaceCheck:
    passed: bool
    interior_facets: int
    boundary_facets: int
    counterexample: tuple[int, ...] | None = None
    detail: str = ""


@dataclass
class ColoringCheck:
    passed: bool
    counterexample: tuple[int, int] | None = None
    detail: str = ""


@dataclass
class EquivolumeCheck:
    passed: bool
    worst_relative_deviation: float
    counterexample: tuple[int, ...] | None = None
    detail: str = ""


@dataclass
class ValidationReport:
    face_to_face: FaceToFaceCheck
    coloring: ColoringCheck
    equivolume: EquivolumeCheck

    @property
    def passed(self) -> bool:
        return self.face_to_face.passed and self.coloring.passed and self.equivolume.passed

    @property
    def interior_facets(self) -> int:
        return self.face_to_face.interior_facets

    @property
    def boundary_facets(self) -> int:
        return self.face_to_face.boundary_facets


# ---------------------------------------------------------------------------
# array helpers
# ---------------------------------------------------------------------------


def _pack_rows(rows: np.ndarray, max_value: int) -> np.ndarray:
    """Injective packing of small nonnegative int rows into int64 words.

    Returns (n, n_words); equality of packed rows == equality of rows.
    """
    bits = max(1, int(max_value).bit_length())
    per_word = 63 // bits
    n, width = rows.shape
    n_words = (width + per_word - 1) // per_word
    out = np.zeros((n, n_words), dtype=np.int64)
    for col in range(width):
        word = out[:, col // per_word]
        np.left_shift(word, bits, out=word)
        np.bitwise_or(word, rows[:, col], out=word)
    return out


def _unpack_rows(keys: np.ndarray, width: int, max_value: int) -> list[tuple[int, ...]]:
    """Inverse of `_pack_rows` for a small key array."""
    bits = max(1, int(max_value).bit_length())
    per_word = 63 // bits
    mask = (1 << bits) - 1
    rows = []
    for key in keys:
        row = [0] * width
        for col in range(width - 1, -1, -1):
            word = col // per_word
            shift = bits * (min(width - 1, (word + 1) * per_word - 1) - col)
            row[col] = int((int(key[word]) >> shift) & mask)
        rows.append(tuple(row))
    return rows


def _facet_keys(mesh: Mesh, cells_sorted: np.ndarray) -> np.ndarray:
    """Packed keys of all facets; row k * n_cells + i is cell i minus its
    k-th smallest vertex.  Keys are injective, so key equality == facet
    equality."""
    d = mesh.dim
    m = mesh.n_cells
    bits = max(1, (mesh.n_vertices - 1).bit_length())
    per_word = 63 // bits
    n_words = (d + per_word - 1) // per_word
    keys = np.zeros((m * (d + 1), n_words), dtype=np.int64)
    for k in range(d + 1):
        block = keys[k * m : (k + 1) * m]
        cols = [c for c in range(d + 1) if c != k]
        for i, c in enumerate(cols):
            word = block[:, i // per_word]
            np.left_shift(word, bits, out=word)
            np.bitwise_or(word, cells_sorted[:, c], out=word)
    return keys


def _facet_ids(mesh: Mesh, row: int) -> tuple[int, ...]:
    """Vertex ids of the facet behind a `_facet_keys` row."""
    m = mesh.n_cells
    k, cell = divmod(row, m)
    ids = sorted(int(v) for v in mesh.cells[cell])
    del ids[k]
    return tuple(ids)


def _extremal_vertices(mesh: Mesh) -> np.ndarray:
    """Vertices with some lattice coordinate at the mesh-wide extreme."""
    lo = mesh.lattice.min(axis=0)
    hi = mesh.lattice.max(axis=0)
    return ((mesh.lattice == lo) | (mesh.lattice == hi)).any(axis=1)


# ---------------------------------------------------------------------------
# checkers
# ---------------------------------------------------------------------------


def check_face_to_face(mesh: Mesh) -> FaceToFaceCheck:
    """Every facet must be shared by exactly 2 cells or lie on the boundary.

    Boundary facets are identified by construction indices, not geometry: a
    singleton facet must contain a vertex whose lattice coordinate is
    extremal at some level (windows cut the tiling only at range ends).
    """
    m = mesh.n_cells
    cells_sorted = np.sort(mesh.cells, axis=1)
    keys = _facet_keys(mesh, cells_sorted)
    if keys.shape[1] == 1:
        order = np.argsort(keys[:, 0], kind="stable")
        sk = keys[order]
        new_group = sk[1:, 0] != sk[:-1, 0]
    else:
        order = np.lexsort(tuple(keys[:, c] for c in range(keys.shape[1] - 1, -1, -1)))
        sk = keys[order]
        new_group = np.any(sk[1:] != sk[:-1], axis=1)
    starts = np.concatenate(([0], np.nonzero(new_group)[0] + 1))
    lengths = np.diff(np.concatenate((starts, [sk.shape[0]])))
    interior = int((lengths == 2).sum())
    boundary = int((lengths == 1).sum())
    over = np.nonzero(lengths > 2)[0]
    if over.size:
        witness = _facet_ids(mesh, int(order[starts[over[0]]]))
        return FaceToFaceCheck(
            False, interior, boundary, witness, f"facet shared by {int(lengths[over[0]])} cells"
        )
    # Facet k*m + i touches the window boundary iff cell i carries an
    # extremal vertex away from sorted position k (prefix/suffix OR trick).
    ext = _extremal_vertices(mesh)[cells_sorted]
    width = mesh.dim + 1
    prefix = np.zeros((m, width + 1), dtype=bool)
    suffix = np.zeros((m, width + 1), dtype=bool)
    for c in range(width):
        prefix[:, c + 1] = prefix[:, c] | ext[:, c]
        suffix[:, width - 1 - c] = suffix[:, width - c] | ext[:, width - 1 - c]
    single_rows = order[starts[lengths == 1]]
    k, cell = np.divmod(single_rows, m)
    on_boundary = prefix[cell, k] | suffix[cell, k + 1]
    if not on_boundary.all():
        witness = _facet_ids(mesh, int(single_rows[np.nonzero(~on_boundary)[0][0]]))
        return FaceToFaceCheck(
            False, interior, boundary, witness, "unmatched facet away from the window boundary"
        )
    return FaceToFaceCheck(True, interior, boundary)


def check_coloring(mesh: Mesh) -> ColoringCheck:
    """Proper (d+1)-coloring: cell-internal pairs differ, colors in 0..d."""
    d = mesh.dim
    if mesh.colors.min() < 0 or mesh.colors.max() > d:
        bad = int(np.argmax((mesh.colors < 0) | (mesh.colors > d)))
        return ColoringCheck(False, (bad, bad), f"color {int(mesh.colors[bad])} out of range 0..{d}")
    cols = mesh.colors[mesh.cells]
    sort_idx = np.argsort(cols, axis=1, kind="stable")
    sorted_cols = np.take_along_axis(cols, sort_idx, axis=1)
    dup = np.diff(sorted_cols, axis=1) == 0
    bad_cells = np.nonzero(dup.any(axis=1))[0]
    if bad_cells.size:
        i = int(bad_cells[0])
        pos = int(np.nonzero(dup[i])[0][0])
        ids = np.take_along_axis(mesh.cells[i][None, :], sort_idx[i][None, :], axis=1)[0]
        edge = (int(ids[pos]), int(ids[pos + 1]))
        return ColoringCheck(False, edge, "equal colors on a cell edge")
    return ColoringCheck(True)


def check_equivolume(mesh: Mesh, p: ParamVector) -> EquivolumeCheck:
    """Integer determinants must be exactly +-d!; embedded volumes must
    re-measure to prod(p_i) within VOLUME_RTOL (independent floating route)."""
    d = mesh.dim
    edges = cell_edge_vectors(mesh)
    dets = batch_det(edges)
    target = math.factorial(d)
    bad = np.nonzero(np.abs(dets) != target)[0]
    if bad.size:
        i = int(bad[0])
        return EquivolumeCheck(
            False,
            math.inf,
            tuple(int(v) for v in mesh.cell_index[i]),
            f"lattice determinant {int(dets[i])}, expected +-{target}",
        )
    # Independent floating route: re-measure the embedded edge vectors
    # (chunked so the float intermediates stay cache-resident).
    parr = np.asarray(p.p)
    prod = p.product()
    worst_dev = -1.0
    worst = 0
    chunk = 1 << 18
    for start in range(0, mesh.n_cells, chunk):
        sl = slice(start, start + chunk)
        measured = np.abs(batch_det(edges[sl] * parr)) / target
        deviation = np.abs(measured / prod - 1.0)
        i = int(np.argmax(deviation))
        if deviation[i] > worst_dev:
            worst_dev = float(deviation[i])
            worst = start + i
    check = EquivolumeCheck(worst_dev <= VOLUME_RTOL, worst_dev)
    if not check.passed:
        check.counterexample = tuple(int(v) for v in mesh.cell_index[worst])
        check.detail = "floating volume deviates from the parameter product"
    return check


def validate(mesh: Mesh, p: ParamVector) -> ValidationReport:
    return ValidationReport(
        face_to_face=check_face_to_face(mesh),
        coloring=check_coloring(mesh),
        equivolume=check_equivolume(mesh, p),
    )


# ---------------------------------------------------------------------------
# edge census
# ---------------------------------------------------------------------------


def edge_census(mesh: Mesh) -> set[EdgeClass]:
    """Absolute lattice difference vectors over all cell edges.

    Complete (equal to the full class set realized by the construction) when
    the mesh covers the default census window; smaller windows yield a
    subset.  Classes are sign-symmetric, so vectors are deduplicated by
    absolute value.
    """
    d = mesh.dim
    dtype = np.int32 if d <= 7 else np.int64
    verts = mesh.lattice.astype(dtype)[mesh.cells]
    found: set[tuple[int, ...]] = set()
    for a, b in itertools.combinations(range(d + 1), 2):
        w = np.abs(verts[:, a, :] - verts[:, b, :])
        keys = _pack_rows(w.astype(np.int64), max(d, int(w.max())))
        if keys.shape[1] == 1:
            uniq = np.unique(keys[:, 0])[:, None]
        else:
            uniq = np.unique(keys, axis=0)
        found.update(_unpack_rows(uniq, d, max(d, int(w.max()))))
    return {EdgeClass(w) for w in found}


def census_union_over_perms(d: int, window: Window | None = None) -> set[EdgeClass]:
    """Union of the census over every permutation vector (exploratory)."""
    if window is None:
        window = default_window(d)
    union: set[EdgeClass] = set()
    level_perms = [list(itertools.permutations(range(i))) for i in range(2, d + 1)]
    for combo in itertools.product(*level_perms):
        pi = PermutationVector(d, tuple(combo))
        union |= edge_census(build(d, pi, window))
    return union


# ---------------------------------------------------------------------------
# cube-corner (Kuhn) reference partition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KuhnSimplex:
    """One simplex 0 <= x_{pi(1)} <= ... <= x_{pi(d)} <= 1 of the unit cube.

    Vertices are the partial sums of unit vectors e_{pi(d)}, e_{pi(d-1)}, ...
    (axes are 1-based in ``permutation``).
    """

    permutation: tuple[int, ...]
    vertices: tuple[tuple[int, ...], ...]

    @property
    def d(self) -> int:
        return len(self.permutation)

    def volume(self) -> Fraction:
        """Exact volume |det| / d! from the integer edge matrix."""
        d = self.d
        edges = [
            [self.vertices[i + 1][j] - self.vertices[0][j] for j in range(d)] for i in range(d)
        ]
        det = _int_det(edges)
        return Fraction(abs(det), math.factorial(d))

    def diameter(self) -> float:
        best = 0.0
        for a, b in itertools.combinations(self.vertices, 2):
            best = max(best, sum((x - y) ** 2 for x, y in zip(a, b)))
        return math.sqrt(best)

    def theta(self) -> float:
        return float(self.volume()) / self.diameter() ** self.d

    def contains_open(self, x: Sequence[float]) -> bool:
        """Strict membership 0 < x_{pi(1)} < ... < x_{pi(d)} < 1."""
        chain = [x[axis - 1] for axis in self.permutation]
        return all(a < b for a, b in zip([0.0] + chain, chain + [1.0]))


def _int_det(m: list[list[int]]) -> int:
    """Bareiss on a small Python-int matrix (exact)."""
    d = len(m)
    m = [row[:] for row in m]
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
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[d - 1][d - 1]


def kuhn_partition(d: int) -> list[KuhnSimplex]:
    """All d! coordinate-ordering simplices of the unit cube."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if d > KUHN_BUDGET_DIM:
        raise ValueError(
            f"d = {d} makes d! = {math.factorial(d)} simplices; budget stops at {KUHN_BUDGET_DIM}"
        )
    simplices = []
    for perm in itertools.permutations(range(1, d + 1)):
        verts = [(0,) * d]
        for k in range(d):
            prev = list(verts[-1])
            prev[perm[d - 1 - k] - 1] += 1
            verts.append(tuple(prev))
        simplices.append(KuhnSimplex(perm, tuple(verts)))
    return simplices


def kuhn_theta(d: int) -> float:
    """Shape ratio of every cube-corner simplex: 1 / (d^(d/2) * d!)."""
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    return 1.0 / (d ** (d / 2.0) * math.factorial(d))


def kuhn_cover_multiplicities(points: np.ndarray, simplices: Iterable[KuhnSimplex]) -> np.ndarray:
    """How many open simplices contain each point (1 for interior points)."""
    pts = np.asarray(points, dtype=float)
    counts = np.zeros(pts.shape[0], dtype=np.int64)
    for s in simplices:
        counts += np.fromiter(
            (s.contains_open(x) for x in pts), dtype=np.int64, count=pts.shape[0]
        )
    return counts


# ---------------------------------------------------------------------------
# regularity comparison
# ---------------------------------------------------------------------------


def compare_regularity(mesh: Mesh, p: ParamVector) -> RegularityReport:
    """Worst-cell shape ratio of the mesh against the cube-corner reference."""
    if mesh.dim < 2:
        raise ValueError("regularity comparison needs d >= 2")
    d = mesh.dim
    volumes = np.abs(lattice_volume_dets(mesh)) / math.factorial(d) * p.product()
    diameters = cell_diameters(mesh, p)
    ratios = volumes / diameters**d
    worst = int(np.argmin(ratios))
    reference = kuhn_theta(d)
    return RegularityReport(
        worst_theta=float(ratios[worst]),
        worst_cell_index=tuple(int(v) for v in mesh.cell_index[worst]),
        max_diameter=float(diameters.max()),
        volume=float(volumes[worst]),
        kuhn_theta=reference,
        ratio_vs_kuhn=float(ratios[worst]) / reference,
    )
