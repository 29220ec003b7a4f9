import math

import numpy as np
import pytest

from sommertile import (
    ParamVector,
    grid_oracle,
    kkt_check,
    maximize_F,
    objective_F,
    optimal_params,
    scale,
    verify_optimum,
)
from sommertile.metrics import enumerate_W, D_j
from sommertile.optimize import gradient_F1, gradient_F1_fd, pivot_candidate_params


def random_params(rng, d, lo=0.1, hi=2.0):
    return ParamVector(tuple(rng.uniform(lo, hi, d)))


# ---------------------------------------------------------------------------
# derivative-free maximizer
# ---------------------------------------------------------------------------


def test_maximize_F_d2():
    result = maximize_F(2)
    assert result.converged
    assert abs(result.p_hat.p[1] - 0.57735) <= 1e-4


def test_maximize_F_d3():
    result = maximize_F(3)
    target = (1.0, 0.57735, 0.40825)
    assert max(abs(a - b) for a, b in zip(result.p_hat.p, target)) <= 1e-4


def test_maximize_F_d5_reaches_closed_form_value():
    result = maximize_F(5)
    assert result.F_value >= objective_F(optimal_params(5)) - 1e-8


def test_maximize_F_never_beats_closed_form():
    for d in range(2, 7):
        result = maximize_F(d, starts=4)
        assert result.F_value <= objective_F(optimal_params(d)) + 1e-9


def test_maximize_F_result_is_consistent():
    result = maximize_F(3)
    assert result.F_value == pytest.approx(objective_F(result.p_hat), rel=1e-12)
    assert result.starts == 8
    assert result.iterations > 0


def test_maximize_F_input_validation():
    with pytest.raises(ValueError):
        maximize_F(1)
    with pytest.raises(ValueError):
        maximize_F(3, starts=0)
    with pytest.raises(ValueError):
        maximize_F(3, tol=0.0)


# ---------------------------------------------------------------------------
# grid oracle
# ---------------------------------------------------------------------------


def test_grid_oracle_d2():
    found = grid_oracle(2, 2000)
    assert abs(found.p[1] - 1 / math.sqrt(3)) <= 2e-3


def test_grid_oracle_d3():
    found = grid_oracle(3, 400)
    star = optimal_params(3)
    assert max(abs(a - b) for a, b in zip(found.p, star.p)) <= 5e-3


def test_grid_oracle_never_beats_optimum():
    for d, res in ((2, 500), (3, 150)):
        found = grid_oracle(d, res)
        assert objective_F(found) <= objective_F(optimal_params(d)) + 1e-9


def test_grid_oracle_input_validation():
    with pytest.raises(ValueError):
        grid_oracle(4, 400)
    with pytest.raises(ValueError):
        grid_oracle(2, 50)


# ---------------------------------------------------------------------------
# KKT checker
# ---------------------------------------------------------------------------


def test_kkt_at_optimum():
    for d in (3, 4, 5):
        report = kkt_check(optimal_params(d))
        assert report.active_set == [2]
        assert report.multiplier(2) > 0
        assert report.stationarity_residual < 1e-7
        assert report.stationary
        assert report.feasibility_violation <= 1e-15
        # inactive multipliers are exactly zero
        assert all(v == 0.0 for v in report.multipliers[1:])


def test_kkt_strict_gap_for_higher_candidates():
    for d in (3, 4, 5):
        star = optimal_params(d)
        classes = enumerate_W(d)
        d1 = D_j(star, classes[0])
        for j in range(3, d + 1):
            assert D_j(star, classes[j - 1]) < d1


def test_kkt_gradient_matches_finite_differences():
    for d in (2, 3, 5):
        star = optimal_params(d)
        g = gradient_F1(star)
        g_fd = gradient_F1_fd(star)
        scale_ref = max(1e-30, float(np.abs(g_fd).max()), objective_F(star))
        assert float(np.abs(g - g_fd).max()) <= 1e-5 * scale_ref


def test_kkt_unconstrained_stationary_point_violates_feasibility():
    # with all multipliers zero the stationarity rows force p_j = 1/(j-1),
    # and there D_2^2 / D_1^2 = (d+2)/d, so the point is infeasible
    for d in (3, 4, 6):
        p = ParamVector((1.0,) + tuple(1.0 / (j - 1) for j in range(2, d + 1)))
        classes = enumerate_W(d)
        d1sq = D_j(p, classes[0]) ** 2
        d2sq = D_j(p, classes[1]) ** 2
        assert d1sq == pytest.approx(d, rel=1e-12)
        assert d2sq / d1sq == pytest.approx((d + 2) / d, rel=1e-12)
        report = kkt_check(p)
        assert report.feasibility_violation > 0


def test_kkt_rejects_unit_point_d2():
    # (1, 1) maximizes the anchor function but violates D_2 <= D_1, so it is
    # not a constrained maximizer; a finite-difference step on the true
    # objective confirms descent
    report = kkt_check(ParamVector((1.0, 1.0)))
    assert report.active_set == []
    assert report.feasibility_violation > 0  # D_2 = 2 > D_1 = sqrt(2)
    assert not report.kkt_point
    h = 1e-6
    fd = (objective_F((1.0, 1.0 + h)) - objective_F((1.0, 1.0 - h))) / (2 * h)
    assert abs(fd) > 0.1  # true objective slope is -1/4 here


def test_kkt_requires_anchored_parameters():
    with pytest.raises(ValueError):
        kkt_check(ParamVector((2.0, 1.0)))


def test_kkt_explicit_equality_d2():
    p2 = optimal_params(2).p[1]
    assert abs((1 + p2**2) - 4 * p2**2) <= 1e-12


# ---------------------------------------------------------------------------
# bundled verification
# ---------------------------------------------------------------------------


def test_verify_optimum_passes():
    for d in (2, 4, 6):
        verification = verify_optimum(d, starts=4)
        assert verification.passed, verification.checks
        names = [name for name, _, _ in verification.checks]
        assert "diameter_squared_2d_over_3" in names
        assert "no_integer_pivot_above_2" in names


def test_pivot_candidate_formula_collapses_at_k2():
    for d in (2, 3, 5):
        star = optimal_params(d)
        diameter = math.sqrt(2 * d / 3)
        candidate = pivot_candidate_params(d, 2, diameter)
        assert max(abs(a - b) for a, b in zip(candidate.p, star.p)) <= 1e-12


# ---------------------------------------------------------------------------
# objective properties
# ---------------------------------------------------------------------------


def test_objective_zero_homogeneous():
    rng = np.random.default_rng(3)
    for d in range(2, 7):
        for _ in range(100):
            p = random_params(rng, d)
            kappa = float(rng.uniform(0.05, 20.0))
            assert objective_F(scale(p, kappa)) == pytest.approx(objective_F(p), rel=1e-12)


def test_rescaling_improves_infeasible_points():
    # if the largest candidate is not D_1, shrinking the tail by 1/(1+delta)
    # scales the objective by exactly (1+delta)
    rng = np.random.default_rng(17)
    for d in (3, 4):
        found = 0
        while found < 20:
            base = ParamVector((1.0,) + tuple(rng.uniform(0.1, 2.0, d - 1)))
            sq = [D_j(base, w) ** 2 for w in enumerate_W(d)]
            dmax = max(sq)
            if sq[0] >= dmax - 1e-9:
                continue  # need D_1 strictly below the max
            found += 1
            # keep D_1 below the max after shrinking: (1+delta)^2 < dmax - D_1^2 + 1
            delta = min(1e-3, 0.5 * (math.sqrt(dmax - sq[0] + 1.0) - 1.0))
            assert delta > 0
            scaled = ParamVector((1.0,) + tuple(v / (1 + delta) for v in base.p[1:]))
            assert objective_F(scaled) == pytest.approx(
                (1 + delta) * objective_F(base), rel=1e-12
            )