"""Parametric face-to-face simplicial tilings of d-dimensional space."""

__version__ = "0.1.0"

from .metrics import (
    D_j,
    D_max,
    EdgeClass,
    RegularityReport,
    cell_diameter,
    cell_volume,
    embed,
    embed_all,
    enumerate_W,
    enumerate_W_hat,
    lattice_volume_det,
    lattice_volume_dets,
    objective_F,
    objective_F_candidates,
    theta,
    thetas,
)
from .meshfile import MeshFile, MeshFormatError, read_mesh, write_mesh, write_vtk
from .optimize import (
    KKTReport,
    OptimizeResult,
    OptimumVerification,
    grid_oracle,
    kkt_check,
    maximize_F,
    verify_optimum,
)
from .params import (
    ParamVector,
    PermutationVector,
    oeis_denominators,
    optimal_params,
    scale,
)
from .tessellation import (
    InvalidBaseError,
    InvalidPermutationError,
    InvalidWindowError,
    LatticeVertex,
    Mesh,
    SimplexCell,
    Window,
    build,
    build_base_1d,
    default_window,
    facets,
    lift,
)
from .validation import (
    ColoringCheck,
    EquivolumeCheck,
    FaceToFaceCheck,
    KuhnSimplex,
    ValidationReport,
    check_coloring,
    check_equivolume,
    check_face_to_face,
    compare_regularity,
    edge_census,
    kuhn_partition,
    kuhn_theta,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
