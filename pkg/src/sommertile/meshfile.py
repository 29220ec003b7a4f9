"""Line-oriented mesh file format and VTK legacy export.

The format is versioned UTF-8 text; integer lattice coordinates and colors
are authoritative (they round-trip bit-exactly), embedded coordinates are
advisory output for inspection:

    sommertile-mesh 1
    dim 2
    window 0:2 0:12
    perms 0,1
    params 1.0 0.5773502691896258
    vertices 9
    v <id> <z_1..z_d> <color> <x_1..x_d>
    ...
    cells 24
    c <chain_1..chain_d> <vid_0..vid_d>
    ...
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .metrics import embed_all, thetas
from .params import ParamVector, PermutationVector
from .tessellation import Mesh, Window

FORMAT_NAME = "sommertile-mesh"
FORMAT_VERSION = 1


class MeshFormatError(ValueError):
    """Mesh file is missing, truncated, or malformed."""


@dataclass
class MeshFile:
    mesh: Mesh
    params: ParamVector
    perms: PermutationVector
    version: int = FORMAT_VERSION


def _format_perms(perms: PermutationVector) -> str:
    if perms.d == 1:
        return "-"
    return ";".join(",".join(str(v) for v in perm) for perm in perms.perms)


def _parse_perms(text: str, d: int) -> PermutationVector:
    if text == "-":
        if d != 1:
            raise MeshFormatError("missing permutations for d >= 2")
        return PermutationVector(1, ())
    try:
        perms = tuple(tuple(int(v) for v in chunk.split(",")) for chunk in text.split(";"))
        return PermutationVector(d, perms)
    except ValueError as exc:
        raise MeshFormatError(f"bad permutation spec {text!r}: {exc}") from exc


def write_mesh(path: str | Path, mesh: Mesh, params: ParamVector,
               perms: PermutationVector | None = None) -> None:
    if params.d != mesh.dim:
        raise ValueError(f"params dimension {params.d} != mesh dimension {mesh.dim}")
    if perms is None:
        perms = PermutationVector.identity(mesh.dim)
    if perms.d != mesh.dim:
        raise ValueError(f"perms dimension {perms.d} != mesh dimension {mesh.dim}")
    x = embed_all(mesh, params)
    lines = [
        f"{FORMAT_NAME} {FORMAT_VERSION}",
        f"dim {mesh.dim}",
        "window " + " ".join(f"{lo}:{hi}" for lo, hi in mesh.window.ranges),
        "perms " + _format_perms(perms),
        "params " + " ".join(repr(v) for v in params.p),
        f"vertices {mesh.n_vertices}",
    ]
    for i in range(mesh.n_vertices):
        z = " ".join(str(int(v)) for v in mesh.lattice[i])
        coords = " ".join(repr(float(v)) for v in x[i])
        lines.append(f"v {i} {z} {int(mesh.colors[i])} {coords}")
    lines.append(f"cells {mesh.n_cells}")
    for i in range(mesh.n_cells):
        chain = " ".join(str(int(v)) for v in mesh.cell_index[i])
        ids = " ".join(str(int(v)) for v in mesh.cells[i])
        lines.append(f"c {chain} {ids}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_mesh(path: str | Path) -> MeshFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MeshFormatError(f"cannot read mesh file {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    pos = 0

    def take() -> str:
        nonlocal pos
        if pos >= len(lines):
            raise MeshFormatError("unexpected end of mesh file")
        line = lines[pos]
        pos += 1
        return line

    def keyed(key: str) -> str:
        line = take()
        if not line.startswith(key + " "):
            raise MeshFormatError(f"expected {key!r} line, got {line!r}")
        return line[len(key) + 1 :]

    header = take().split()
    if len(header) != 2 or header[0] != FORMAT_NAME:
        raise MeshFormatError(f"not a {FORMAT_NAME} file")
    version = int(header[1])
    if version != FORMAT_VERSION:
        raise MeshFormatError(f"unsupported format version {version}")

    try:
        dim = int(keyed("dim"))
        ranges = tuple(
            (int(a), int(b))
            for a, b in (chunk.split(":") for chunk in keyed("window").split())
        )
        perms = _parse_perms(keyed("perms"), dim)
        params = ParamVector(tuple(float(v) for v in keyed("params").split()))
        n_vertices = int(keyed("vertices"))
        lattice = np.empty((n_vertices, dim), dtype=np.int64)
        colors = np.empty(n_vertices, dtype=np.int64)
        for i in range(n_vertices):
            fields = take().split()
            if fields[0] != "v" or len(fields) != 2 + 2 * dim + 1:
                raise MeshFormatError(f"bad vertex record: {' '.join(fields)!r}")
            if int(fields[1]) != i:
                raise MeshFormatError(f"vertex ids must be dense and ordered, got {fields[1]}")
            lattice[i] = [int(v) for v in fields[2 : 2 + dim]]
            colors[i] = int(fields[2 + dim])
        n_cells = int(keyed("cells"))
        cells = np.empty((n_cells, dim + 1), dtype=np.int64)
        chains = np.empty((n_cells, dim), dtype=np.int64)
        for i in range(n_cells):
            fields = take().split()
            if fields[0] != "c" or len(fields) != 1 + dim + dim + 1:
                raise MeshFormatError(f"bad cell record: {' '.join(fields)!r}")
            chains[i] = [int(v) for v in fields[1 : 1 + dim]]
            cells[i] = [int(v) for v in fields[1 + dim :]]
    except MeshFormatError:
        raise
    except (ValueError, IndexError) as exc:
        raise MeshFormatError(f"malformed mesh file: {exc}") from exc
    if pos != len(lines):
        raise MeshFormatError("trailing content after cell records")
    if params.d != dim:
        raise MeshFormatError(f"params dimension {params.d} != dim {dim}")
    try:
        mesh = Mesh(dim, lattice, colors, cells, chains, Window(ranges))
    except ValueError as exc:
        raise MeshFormatError(f"inconsistent mesh content: {exc}") from exc
    return MeshFile(mesh=mesh, params=params, perms=perms, version=version)


_VTK_CELL_TYPE = {2: 5, 3: 10}  # triangle, tetrahedron


def write_vtk(path: str | Path, mesh: Mesh, params: ParamVector) -> None:
    """VTK legacy ASCII unstructured grid with per-cell shape ratio and
    per-point colors; supported for d in {2, 3} (2D points are z-padded)."""
    d = mesh.dim
    if d < 2:
        raise ValueError("export needs d >= 2 (shape ratio undefined for segments)")
    if d > 3:
        raise ValueError(
            f"VTK export supports d <= 3, got d = {d}; write the generic mesh file instead"
        )
    x = embed_all(mesh, params)
    if d == 2:
        x = np.concatenate([x, np.zeros((mesh.n_vertices, 1))], axis=1)
    quality = thetas(mesh, params)
    with open(path, "w", encoding="utf-8") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(f"sommertile d={d} tiling\n")
        f.write("ASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {mesh.n_vertices} double\n")
        for row in x:
            f.write(" ".join(f"{v:.17g}" for v in row) + "\n")
        f.write(f"\nCELLS {mesh.n_cells} {mesh.n_cells * (d + 2)}\n")
        for row in mesh.cells:
            f.write(f"{d + 1} " + " ".join(str(int(v)) for v in row) + "\n")
        f.write(f"\nCELL_TYPES {mesh.n_cells}\n")
        for _ in range(mesh.n_cells):
            f.write(f"{_VTK_CELL_TYPE[d]}\n")
        f.write(f"\nCELL_DATA {mesh.n_cells}\n")
        f.write("SCALARS theta double 1\nLOOKUP_TABLE default\n")
        for v in quality:
            f.write(f"{v:.17g}\n")
        f.write(f"\nPOINT_DATA {mesh.n_vertices}\n")
        f.write("SCALARS color int 1\nLOOKUP_TABLE default\n")
        for c in mesh.colors:
            f.write(f"{int(c)}\n")
