"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run `pytest -s tests/test_acceptance.py` to see the per-criterion lines
while the suite executes (plain `pytest` shows them for failing criteria).
"""

import math
from fractions import Fraction

import numpy as np

from sommertile import (
    ParamVector,
    Window,
    build,
    check_coloring,
    check_equivolume,
    check_face_to_face,
    compare_regularity,
    edge_census,
    enumerate_W,
    enumerate_W_hat,
    grid_oracle,
    kkt_check,
    kuhn_partition,
    kuhn_theta,
    maximize_F,
    objective_F,
    optimal_params,
    read_mesh,
    scale,
    write_mesh,
)
from sommertile.metrics import D_j, lattice_volume_dets
from sommertile.optimize import verify_optimum


def _report(number: int, name: str, failures: list[str]) -> None:
    status = "PASS" if not failures else "FAIL"
    print(f"[acceptance {number}] {name}: {status}")
    assert not failures, f"criterion {number} ({name}): " + "; ".join(failures)


def test_criterion_1_equivolume(meshes):
    failures = []
    for d in (2, 3, 4, 5):
        mesh = meshes.get(d)
        dets = lattice_volume_dets(mesh)
        if not np.all(np.abs(dets) == math.factorial(d)):
            failures.append(f"d={d}: lattice determinant != +-{math.factorial(d)}")
        check = check_equivolume(mesh, optimal_params(d))
        if not check.passed or check.worst_relative_deviation > 1e-12:
            failures.append(f"d={d}: floating volume deviation {check.worst_relative_deviation}")
    _report(1, "equal volumes on default windows", failures)


def test_criterion_2_face_to_face(meshes):
    failures = []
    for d in (2, 3, 4, 5):
        for nonidentity in (False, True):
            check = check_face_to_face(meshes.get(d, nonidentity))
            if not check.passed:
                tag = "swap" if nonidentity else "identity"
                failures.append(f"d={d} ({tag}): {check.detail}")
    _report(2, "face-to-face with boundary-only singleton facets", failures)


def test_criterion_3_coloring(meshes):
    failures = []
    for d in (2, 3, 4, 5):
        for nonidentity in (False, True):
            mesh = meshes.get(d, nonidentity)
            check = check_coloring(mesh)
            if not check.passed:
                failures.append(f"d={d} nonidentity={nonidentity}: {check.detail}")
            if not np.array_equal(mesh.colors, mesh.lattice[:, -1] % (d + 1)):
                failures.append(f"d={d} nonidentity={nonidentity}: residue law broken")
    _report(3, "proper coloring and top-level residue law", failures)


def test_criterion_4_edge_census(meshes):
    failures = []
    if {c.w for c in edge_census(meshes.get(2))} != {(0, 2), (1, 1)}:
        failures.append("d=2 census differs from {(0,2),(1,1)}")
    got3 = {c.w for c in edge_census(meshes.get(3))}
    want3 = {c.w for c in enumerate_W_hat(3)}
    if got3 != want3 or len(got3) != 5:
        failures.append(f"d=3 census {sorted(got3)} != candidate set")
    got4 = {c.w for c in edge_census(meshes.get(4))}
    if (1, 1, 2, 3) in got4:
        failures.append("d=4 census contains (1,1,2,3)")
    if (1, 1, 2, 3) not in {c.w for c in enumerate_W_hat(4)}:
        failures.append("(1,1,2,3) missing from the d=4 candidate set")
    _report(4, "edge census", failures)


def test_criterion_5_optimal_parameters():
    failures = []
    for d in (2, 3, 4, 5):
        found = maximize_F(d)
        star = optimal_params(d)
        dev = max(abs(a - b) for a, b in zip(found.p_hat.p, star.p))
        if dev > 1e-4:
            failures.append(f"d={d}: maximizer deviation {dev:.2e}")
    for d, res in ((2, 2000), (3, 400)):
        found = grid_oracle(d, res)
        dev = max(abs(a - b) for a, b in zip(found.p, optimal_params(d).p))
        if dev > 5e-3:
            failures.append(f"d={d}: grid oracle deviation {dev:.2e}")
    for d in range(2, 7):
        star = optimal_params(d)
        dsq = max(D_j(star, w) for w in enumerate_W(d)) ** 2
        if abs(dsq - 2 * d / 3) > 1e-12:
            failures.append(f"d={d}: D(p*)^2 = {dsq!r}")
        reference = math.sqrt(3) / 2 * d / (d ** (d / 2) * math.factorial(d))
        if abs(objective_F(star) / reference - 1) > 1e-12:
            failures.append(f"d={d}: F(p*) off closed form")
    _report(5, "optimal parameters (search, oracle, closed forms)", failures)


def test_criterion_6_kkt():
    failures = []
    for d in (3, 4, 5):
        star = optimal_params(d)
        report = kkt_check(star)
        if report.active_set != [2]:
            failures.append(f"d={d}: active set {report.active_set}")
        if not report.multiplier(2) > 0:
            failures.append(f"d={d}: mu_2 = {report.multiplier(2)}")
        if report.stationarity_residual >= 1e-7:
            failures.append(f"d={d}: residual {report.stationarity_residual:.2e}")
        classes = enumerate_W(d)
        d1 = D_j(star, classes[0])
        for j in range(3, d + 1):
            if not D_j(star, classes[j - 1]) < d1:
                failures.append(f"d={d}: D_{j} not strictly below D_1")
    p2 = optimal_params(2).p[1]
    if abs((1 + p2 * p2) - 4 * p2 * p2) > 1e-12:
        failures.append("d=2: 1 + p_2^2 != 4 p_2^2")
    for d in (2, 3, 4, 5, 6):
        verification = verify_optimum(d, starts=4)
        if not verification.passed:
            bad = [name for name, ok, _ in verification.checks if not ok]
            failures.append(f"d={d}: verify_optimum failed {bad}")
    _report(6, "KKT conditions at the optimum", failures)


def test_criterion_7_kuhn_comparison(meshes):
    failures = []
    for d in (2, 3, 4):
        simplices = kuhn_partition(d)
        if len(simplices) != math.factorial(d):
            failures.append(f"d={d}: {len(simplices)} simplices")
        if sum(s.volume() for s in simplices) != Fraction(1):
            failures.append(f"d={d}: volumes do not sum to 1 exactly")
        reference = kuhn_theta(d)
        for s in simplices:
            if abs(s.theta() / reference - 1) > 1e-12:
                failures.append(f"d={d}: theta(S_pi) off closed form")
                break
        report = compare_regularity(meshes.get(d), optimal_params(d))
        bound = math.sqrt(3) / 2 * d
        if report.ratio_vs_kuhn < bound - 1e-9:
            failures.append(f"d={d}: ratio {report.ratio_vs_kuhn} < {bound}")
        if d == 2 and abs(report.ratio_vs_kuhn - math.sqrt(3)) > 1e-12:
            failures.append(f"d=2: ratio {report.ratio_vs_kuhn!r} != sqrt(3)")
    _report(7, "regularity gain over the cube-corner partition", failures)


def test_criterion_8_integer_sequence():
    from sommertile import oeis_denominators

    failures = []
    expected = [2, 6, 12, 27, 48, 75, 108, 147, 192, 243, 300]
    got = oeis_denominators(11)
    if got != expected:
        failures.append(f"sequence {got}")
    _report(8, "integer sequence of optimal parameter squares", failures)


def test_criterion_9_property_suites(tmp_path):
    failures = []
    rng = np.random.default_rng(2718281)

    # objective is invariant under scaling, 100 trials per dimension
    for d in range(2, 7):
        for _ in range(100):
            p = ParamVector(tuple(rng.uniform(0.1, 2.0, d)))
            kappa = float(rng.uniform(0.05, 20.0))
            if abs(objective_F(scale(p, kappa)) / objective_F(p) - 1) > 1e-12:
                failures.append(f"homogeneity broken at d={d}")
                break

    # min over the dominant classes equals min over all candidates
    for d in range(2, 7):
        w = np.array([c.w for c in enumerate_W(d)], dtype=float) ** 2
        w_hat = np.array([c.w for c in enumerate_W_hat(d)], dtype=float) ** 2
        batch = rng.uniform(0.1, 2.0, size=(1000, d))
        prod = np.prod(batch, axis=1)
        f_w = prod / np.max(batch**2 @ w.T, axis=1) ** (d / 2)
        f_hat = prod / np.max(batch**2 @ w_hat.T, axis=1) ** (d / 2)
        if not np.all(np.abs(f_w / f_hat - 1) <= 1e-12):
            failures.append(f"objective route mismatch at d={d}")

    # shrinking the tail of an infeasible point scales the objective exactly
    for d in (3, 4):
        found = 0
        while found < 20:
            base = ParamVector((1.0,) + tuple(rng.uniform(0.1, 2.0, d - 1)))
            sq = [D_j(base, w) ** 2 for w in enumerate_W(d)]
            dmax = max(sq)
            if sq[0] >= dmax - 1e-9:
                continue
            found += 1
            delta = min(1e-3, 0.5 * (math.sqrt(dmax - sq[0] + 1.0) - 1.0))
            scaled = ParamVector((1.0,) + tuple(v / (1 + delta) for v in base.p[1:]))
            if abs(objective_F(scaled) / ((1 + delta) * objective_F(base)) - 1) > 1e-12:
                failures.append(f"rescaling identity broken at d={d}")
                break

    # mesh files round-trip bit exactly
    mesh = build(3, None, Window(((0, 2), (0, 4), (0, 6))))
    path = tmp_path / "roundtrip.mesh"
    write_mesh(path, mesh, optimal_params(3))
    loaded = read_mesh(path)
    if not loaded.mesh.structurally_equal(mesh):
        failures.append("mesh file round trip not bit exact")
    if loaded.params.p != optimal_params(3).p:
        failures.append("parameter round trip not bit exact")

    _report(9, "property suites", failures)
