"""Face-to-face simplicial tilings of Z^d windows by repeated prism slicing.

The construction works entirely in integer lattice coordinates (the metric
embedding x_i = z_i * p_i lives in :mod:`sommertile.metrics`):

* Level 1: the line is cut at the integers; vertex z gets color z mod 2.
* Lift to level d: every vertex of the (d-1)-mesh carries a color in
  {0, ..., d-1} (a proper d-coloring).  Above a vertex of color c, new
  vertices appear at every height j with j == c (mod d).  Over each base
  cell this staggers one vertex per height, and the prism above the cell
  is sliced into simplices by taking d+1 consecutive heights

      cell z  =  {B_z, B_{z+1}, ..., B_{z+d}},   B_j above the color-(j mod d)
                                                 vertex of the base cell.

  New colors are read off the heights, color(B_j) = j mod (d+1), which is
  again proper: heights inside one cell are consecutive.

Because the height pattern above a vertex depends only on its color, two
cells sharing a base facet generate identical vertices over it, which is
what makes the tiling face-to-face.  An optional permutation of the base
colors before each lift (``PermutationVector``) re-staggers the heights
and yields the wider family of tilings; the identity reproduces the plain
construction.

Meshes are bounded by a Window: one half-open integer range per level.
The range at level i bounds the slice index z at that level, so the cell
count is exactly the product of the range lengths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .params import PermutationVector


class InvalidWindowError(ValueError):
    """A window range is empty or malformed."""


class InvalidBaseError(ValueError):
    """A base mesh does not carry a proper coloring suitable for lifting."""


class InvalidPermutationError(ValueError):
    """A color permutation is not a bijection on the expected range."""


@dataclass(frozen=True)
class Window:
    """Half-open integer ranges [lo_i, hi_i), one per construction level."""

    ranges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        ranges = tuple((int(lo), int(hi)) for lo, hi in self.ranges)
        object.__setattr__(self, "ranges", ranges)
        for level, (lo, hi) in enumerate(ranges, start=1):
            if hi <= lo:
                raise InvalidWindowError(f"level-{level} range [{lo}, {hi}) is empty")

    @property
    def d(self) -> int:
        return len(self.ranges)

    def lengths(self) -> tuple[int, ...]:
        return tuple(hi - lo for lo, hi in self.ranges)

    def n_cells(self) -> int:
        n = 1
        for length in self.lengths():
            n *= length
        return n


def default_window(d: int) -> Window:
    """Census window: two full staggering periods per level.

    The height pattern at level i repeats with period i*(i+1) (colors have
    period i+1, heights period i), so [0, 2i(i+1)) sees every edge class the
    construction can realize at that level.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    ranges = [(0, 2)]
    ranges += [(0, 2 * i * (i + 1)) for i in range(2, d + 1)]
    return Window(tuple(ranges))


@dataclass(frozen=True)
class LatticeVertex:
    id: int
    z: tuple[int, ...]
    color: int


@dataclass(frozen=True)
class SimplexCell:
    """d+1 vertex ids, ascending in the last lattice coordinate, plus the
    construction chain (z_1, ..., z_d) that generated the cell."""

    vertex_ids: tuple[int, ...]
    index: tuple[int, ...]


@dataclass(frozen=True)
class Mesh:
    """Window of a tessellation, purely combinatorial (parameter-free).

    Arrays: ``lattice`` is (n_vertices, dim) int64 of lattice coordinates,
    ``colors`` (n_vertices,), ``cells`` (n_cells, dim+1) vertex ids ascending
    in the last lattice coordinate, ``cell_index`` (n_cells, dim) chains.
    """

    dim: int
    lattice: np.ndarray
    colors: np.ndarray
    cells: np.ndarray
    cell_index: np.ndarray
    window: Window

    def __post_init__(self) -> None:
        for name in ("lattice", "colors", "cells", "cell_index"):
            arr = getattr(self, name)
            object.__setattr__(self, name, np.ascontiguousarray(arr, dtype=np.int64))
        if self.lattice.shape != (self.n_vertices, self.dim):
            raise ValueError("lattice array has wrong shape")
        if self.cells.ndim != 2 or self.cells.shape[1] != self.dim + 1:
            raise ValueError("cells array has wrong shape")
        if self.cell_index.shape != (self.n_cells, self.dim):
            raise ValueError("cell_index array has wrong shape")
        if self.window.d != self.dim:
            raise ValueError("window dimension mismatch")
        if self.n_cells != self.window.n_cells():
            raise ValueError(
                f"cell count {self.n_cells} != window product {self.window.n_cells()}"
            )
        referenced = np.zeros(self.n_vertices, dtype=bool)
        referenced[self.cells.ravel()] = True
        if not referenced.all():
            raise ValueError("mesh contains orphan vertices")

    @property
    def n_vertices(self) -> int:
        return self.lattice.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    def vertex(self, i: int) -> LatticeVertex:
        return LatticeVertex(i, tuple(int(v) for v in self.lattice[i]), int(self.colors[i]))

    def cell(self, i: int) -> SimplexCell:
        return SimplexCell(
            tuple(int(v) for v in self.cells[i]),
            tuple(int(v) for v in self.cell_index[i]),
        )

    def structurally_equal(self, other: "Mesh") -> bool:
        """Bit-exact equality of lattice coordinates, colors, cells and chains."""
        return (
            self.dim == other.dim
            and self.window == other.window
            and np.array_equal(self.lattice, other.lattice)
            and np.array_equal(self.colors, other.colors)
            and np.array_equal(self.cells, other.cells)
            and np.array_equal(self.cell_index, other.cell_index)
        )


def build_base_1d(z_range: tuple[int, int]) -> Mesh:
    """Segments [z, z+1] for z in the range; vertex color z mod 2."""
    lo, hi = int(z_range[0]), int(z_range[1])
    window = Window(((lo, hi),))  # raises on empty range
    zs = np.arange(lo, hi + 1, dtype=np.int64)
    n = zs.size
    cells = np.stack([np.arange(n - 1), np.arange(1, n)], axis=1)
    return Mesh(
        dim=1,
        lattice=zs[:, None],
        colors=zs % 2,
        cells=cells,
        cell_index=zs[:-1, None],
        window=window,
    )


def lift(base: Mesh, pi_d: Sequence[int], z_range: tuple[int, int]) -> Mesh:
    """Raise a (d-1)-mesh to a d-mesh over one slice range.

    ``pi_d`` permutes the base colors {0, ..., d-1} before the lift; the
    recolored base coloring must be proper (each base cell carries every
    color exactly once).
    """
    d = base.dim + 1
    pi = np.asarray(pi_d, dtype=np.int64)
    if pi.shape != (d,) or not np.array_equal(np.sort(pi), np.arange(d)):
        raise InvalidPermutationError(f"{pi_d!r} is not a permutation of 0..{d - 1}")
    zlo, zhi = int(z_range[0]), int(z_range[1])
    if zhi <= zlo:
        raise InvalidWindowError(f"slice range [{zlo}, {zhi}) is empty")
    if base.colors.min() < 0 or base.colors.max() >= d:
        raise InvalidBaseError(f"base colors must lie in 0..{d - 1}")
    recolored = pi[base.colors]
    cell_cols = recolored[base.cells]  # (m, d)
    if np.any(np.sort(cell_cols, axis=1) != np.arange(d)):
        raise InvalidBaseError("base coloring is not a proper d-coloring")

    # Vertices: above a base vertex of color c, heights j == c (mod d) within
    # [zlo, zhi + d).  Cell z uses heights z..z+d, so this is exactly the set
    # of heights reachable from some slice in the range (no orphans).
    first = zlo + ((recolored - zlo) % d)
    counts = (zhi + d - first + d - 1) // d
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    total = int(counts.sum())
    owner = np.repeat(np.arange(base.n_vertices), counts)
    heights = first[owner] + d * (np.arange(total) - np.repeat(offsets, counts))
    lattice = np.concatenate([base.lattice[owner], heights[:, None]], axis=1)
    colors = heights % (d + 1)

    # Cells: per base cell, the vertex of color c (column c after sorting by
    # color), indexed by the height residues of each slice window.
    order = np.argsort(cell_cols, axis=1)
    vert_by_color = np.take_along_axis(base.cells, order, axis=1)
    zs = np.arange(zlo, zhi, dtype=np.int64)
    jgrid = zs[:, None] + np.arange(d + 1, dtype=np.int64)[None, :]  # (nz, d+1)
    base_vid = vert_by_color[:, jgrid % d]  # (m, nz, d+1)
    new_ids = offsets[base_vid] + (jgrid[None, :, :] - first[base_vid]) // d
    cells = new_ids.reshape(-1, d + 1)

    nz = zs.size
    chain = np.concatenate(
        [np.repeat(base.cell_index, nz, axis=0), np.tile(zs, base.n_cells)[:, None]],
        axis=1,
    )
    window = Window(base.window.ranges + ((zlo, zhi),))
    return Mesh(d, lattice, colors, cells, chain, window)


def build(d: int, pi: PermutationVector | None, window: Window) -> Mesh:
    """Base segments plus one lift per level 2..d; identity pi if None."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if window.d != d:
        raise InvalidWindowError(f"window has {window.d} ranges, expected {d}")
    if pi is None:
        pi = PermutationVector.identity(d)
    if pi.d != d:
        raise InvalidPermutationError(f"permutation vector is for d = {pi.d}, expected {d}")
    mesh = build_base_1d(window.ranges[0])
    for level in range(2, d + 1):
        mesh = lift(mesh, pi.level(level), window.ranges[level - 1])
    return mesh


def facets(cell: SimplexCell) -> list[tuple[int, ...]]:
    """The d+1 facets of a d-simplex, each a sorted tuple of d vertex ids."""
    ids = cell.vertex_ids
    return [tuple(sorted(ids[:k] + ids[k + 1 :])) for k in range(len(ids))]
