"""Command-line front end.

Subcommands: build, validate, census, optimize, compare, sequence, export.
Exit codes: 0 on success / all checks passing, 1 on validation or runtime
failure, 2 on usage errors.  Report commands take ``--json PATH`` (``-`` for
stdout) for machine-readable output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .meshfile import MeshFile, MeshFormatError, read_mesh, write_mesh, write_vtk
from .metrics import enumerate_W_hat, objective_F
from .optimize import kkt_check, maximize_F, verify_optimum
from .params import ParamVector, PermutationVector, oeis_denominators, optimal_params
from .tessellation import Mesh, Window, build, default_window
from .validation import compare_regularity, edge_census, validate


def _parse_window(text: str) -> Window:
    try:
        ranges = tuple(
            (int(a), int(b)) for a, b in (chunk.split(":") for chunk in text.split(","))
        )
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad window spec {text!r} (want lo:hi,lo:hi,...)") from exc
    return Window(ranges)


def _parse_perm(text: str) -> tuple[tuple[int, ...], ...]:
    try:
        return tuple(tuple(int(v) for v in chunk.split(",")) for chunk in text.split(";"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad permutation spec {text!r}") from exc


def _parse_params(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad parameter spec {text!r}") from exc


def _default_params(d: int) -> ParamVector:
    return optimal_params(d) if d >= 2 else ParamVector((1.0,))


def _emit_json(payload: dict, target: str | None) -> None:
    if target is None:
        return
    text = json.dumps(payload, indent=2, sort_keys=True)
    if target == "-":
        print(text)
    else:
        with open(target, "w", encoding="utf-8") as f:
            f.write(text + "\n")


def _resolve_mesh(args: argparse.Namespace) -> MeshFile:
    """Mesh from a file when given, otherwise built from --dim flags."""
    if getattr(args, "meshfile", None):
        return read_mesh(args.meshfile)
    if args.dim is None:
        raise SystemExit2("either a mesh file or --dim is required")
    d = args.dim
    window = args.window if args.window is not None else default_window(d)
    perms = PermutationVector(d, args.perm) if args.perm else PermutationVector.identity(d)
    params = ParamVector(args.params) if args.params else _default_params(d)
    mesh = build(d, perms, window)
    return MeshFile(mesh=mesh, params=params, perms=perms)


class SystemExit2(Exception):
    """Usage error detected after argparse (exit code 2)."""


# ---------------------------------------------------------------------------
# subcommand bodies
# ---------------------------------------------------------------------------


def _cmd_build(args: argparse.Namespace) -> int:
    d = args.dim
    window = args.window if args.window is not None else default_window(d)
    perms = PermutationVector(d, args.perm) if args.perm else PermutationVector.identity(d)
    params = ParamVector(args.params) if args.params else _default_params(d)
    mesh = build(d, perms, window)
    out = args.output or f"tiling_d{d}.mesh"
    write_mesh(out, mesh, params, perms)
    print(f"built d={d} window {'x'.join(f'{lo}:{hi}' for lo, hi in window.ranges)}")
    print(f"vertices {mesh.n_vertices}")
    print(f"cells {mesh.n_cells}")
    print(f"wrote {out}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    mf = _resolve_mesh(args)
    report = validate(mf.mesh, mf.params)
    for name, frag in (
        ("face-to-face", report.face_to_face),
        ("coloring", report.coloring),
        ("equivolume", report.equivolume),
    ):
        state = "pass" if frag.passed else f"FAIL ({frag.detail})"
        print(f"{name}: {state}")
    print(f"interior facets {report.interior_facets}, boundary facets {report.boundary_facets}")
    _emit_json(
        {
            "command": "validate",
            "dim": mf.mesh.dim,
            "vertices": mf.mesh.n_vertices,
            "cells": mf.mesh.n_cells,
            "passed": report.passed,
            "face_to_face": {
                "passed": report.face_to_face.passed,
                "counterexample": report.face_to_face.counterexample,
                "interior_facets": report.interior_facets,
                "boundary_facets": report.boundary_facets,
            },
            "coloring": {
                "passed": report.coloring.passed,
                "counterexample": report.coloring.counterexample,
            },
            "equivolume": {
                "passed": report.equivolume.passed,
                "worst_relative_deviation": report.equivolume.worst_relative_deviation,
            },
        },
        args.json,
    )
    return 0 if report.passed else 1


def _cmd_census(args: argparse.Namespace) -> int:
    mf = _resolve_mesh(args)
    classes = sorted(ec.w for ec in edge_census(mf.mesh))
    candidates = {ec.w for ec in enumerate_W_hat(mf.mesh.dim)} if mf.mesh.dim >= 2 else set()
    print(f"{len(classes)} edge classes")
    for w in classes:
        print(" ".join(str(v) for v in w))
    realizable = all(w in candidates for w in classes) if candidates else True
    if candidates:
        missing = sorted(candidates - set(classes))
        print(f"candidate classes not realized: {len(missing)}")
        for w in missing:
            print("  " + " ".join(str(v) for v in w))
    _emit_json(
        {
            "command": "census",
            "dim": mf.mesh.dim,
            "classes": [list(w) for w in classes],
            "within_candidate_set": realizable,
        },
        args.json,
    )
    return 0 if realizable else 1


def _cmd_optimize(args: argparse.Namespace) -> int:
    d = args.dim
    result = maximize_F(d, starts=args.starts, tol=args.tol)
    star = optimal_params(d)
    report = kkt_check(star)
    print("p_hat " + " ".join(f"{v:.10f}" for v in result.p_hat.p))
    print(f"F(p_hat) {result.F_value:.12e}  (evals {result.iterations}, starts {result.starts})")
    print("p_star " + " ".join(f"{v:.10f}" for v in star.p))
    print(f"F(p_star) {objective_F(star):.12e}")
    print(f"kkt active set {report.active_set}")
    print("kkt multipliers " + " ".join(f"{v:.6e}" for v in report.multipliers))
    print(f"kkt stationarity residual {report.stationarity_residual:.3e}")
    verification = verify_optimum(d, starts=args.starts, tol=args.tol)
    for name, ok, detail in verification.checks:
        print(f"{'pass' if ok else 'FAIL'} {name}: {detail}")
    _emit_json(
        {
            "command": "optimize",
            "dim": d,
            "p_hat": list(result.p_hat.p),
            "F_hat": result.F_value,
            "p_star": list(star.p),
            "F_star": objective_F(star),
            "converged": result.converged,
            "kkt": {
                "active_set": report.active_set,
                "multipliers": report.multipliers,
                "stationarity_residual": report.stationarity_residual,
                "feasibility_violation": report.feasibility_violation,
            },
            "checks": [
                {"name": name, "passed": ok, "detail": detail}
                for name, ok, detail in verification.checks
            ],
            "passed": verification.passed,
        },
        args.json,
    )
    return 0 if verification.passed else 1


def _cmd_compare(args: argparse.Namespace) -> int:
    mf = _resolve_mesh(args)
    d = mf.mesh.dim
    if d < 2:
        raise SystemExit2("regularity comparison needs d >= 2")
    report = compare_regularity(mf.mesh, mf.params)
    bound = math.sqrt(3.0) / 2.0 * d
    at_optimum = all(
        abs(a - b) <= 1e-12 for a, b in zip(mf.params.p, optimal_params(d).p)
    )
    print(f"worst cell theta {report.worst_theta:.12e} at chain {report.worst_cell_index}")
    print(f"reference cube-corner theta {report.kuhn_theta:.12e}")
    print(f"regularity ratio {report.ratio_vs_kuhn:.12f}")
    passed = report.worst_theta >= objective_F(mf.params) - 1e-12
    if at_optimum:
        print(f"optimal-parameter bound {bound:.12f} (sqrt(3)/2 * d)")
        passed = passed and report.ratio_vs_kuhn >= bound - 1e-9
    _emit_json(
        {
            "command": "compare",
            "dim": d,
            "worst_theta": report.worst_theta,
            "worst_cell_index": list(report.worst_cell_index),
            "max_diameter": report.max_diameter,
            "volume": report.volume,
            "kuhn_theta": report.kuhn_theta,
            "ratio_vs_kuhn": report.ratio_vs_kuhn,
            "bound": bound if at_optimum else None,
            "passed": passed,
        },
        args.json,
    )
    return 0 if passed else 1


def _cmd_sequence(args: argparse.Namespace) -> int:
    terms = oeis_denominators(args.n)
    print(", ".join(str(t) for t in terms))
    _emit_json({"command": "sequence", "n": args.n, "terms": terms}, args.json)
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    mf = read_mesh(args.meshfile)
    if args.format != "vtk-legacy-ascii":
        raise SystemExit2(f"unsupported format {args.format!r}")
    write_vtk(args.output, mf.mesh, mf.params)
    print(f"wrote {args.output}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_mesh_source(sub: argparse.ArgumentParser, with_file: bool = True) -> None:
    if with_file:
        sub.add_argument("meshfile", nargs="?", help="mesh file (alternative to --dim)")
    sub.add_argument("--dim", type=int, help="build a default-window mesh of this dimension")
    sub.add_argument("--window", type=_parse_window, help="lo:hi,lo:hi,... construction ranges")
    sub.add_argument("--perm", type=_parse_perm, help="semicolon-separated color permutations")
    sub.add_argument("--params", type=_parse_params, help="comma-separated positive parameters")
    sub.add_argument("--json", help="write machine-readable report to PATH ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sommertile",
        description="Parametric face-to-face simplicial tilings of d-space",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a mesh window and write a mesh file")
    b.add_argument("--dim", type=int, required=True)
    b.add_argument("--window", type=_parse_window)
    b.add_argument("--perm", type=_parse_perm)
    b.add_argument("--params", type=_parse_params)
    b.add_argument("-o", "--output")
    b.set_defaults(func=_cmd_build)

    v = sub.add_parser("validate", help="face-to-face, coloring, equivolume checks")
    _add_mesh_source(v)
    v.set_defaults(func=_cmd_validate)

    c = sub.add_parser("census", help="edge classes realized by a mesh")
    _add_mesh_source(c)
    c.set_defaults(func=_cmd_census)

    o = sub.add_parser("optimize", help="maximize the shape objective and verify the optimum")
    o.add_argument("--dim", type=int, required=True)
    o.add_argument("--starts", type=int, default=8)
    o.add_argument("--tol", type=float, default=1e-7)
    o.add_argument("--json")
    o.set_defaults(func=_cmd_optimize)

    k = sub.add_parser("compare", help="worst-cell regularity against the cube-corner partition")
    _add_mesh_source(k)
    k.set_defaults(func=_cmd_compare)

    s = sub.add_parser("sequence", help="integer denominators of the optimal parameter squares")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--json")
    s.set_defaults(func=_cmd_sequence)

    e = sub.add_parser("export", help="VTK legacy ASCII export for d <= 3")
    e.add_argument("meshfile")
    e.add_argument("-o", "--output", required=True)
    e.add_argument("--format", default="vtk-legacy-ascii", choices=["vtk-legacy-ascii"])
    e.set_defaults(func=_cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except MeshFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OverflowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
