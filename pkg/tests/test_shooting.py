import math

import numpy as np
import pytest

from bnlab.shooting import (
    InsufficientData,
    NodalBranchPoint,
    continue_branch,
    extract_point,
    find_nodal,
    fit_asymptotics,
    shoot,
)


def test_linear_mode_recovers_eigenfunction(pair4):
    sol = shoot(4, pair4.lambda1, 1.0, nonlinear=False, rel_tol=1e-11)
    assert abs(sol.profile(1.0)) < 1e-6
    # proportional to e1 throughout
    scale = sol.profile(0.5) / pair4.e1(0.5)
    for r in (0.2, 0.4, 0.7, 0.9):
        assert sol.profile(r) == pytest.approx(scale * pair4.e1(r), rel=1e-6)


def test_blow_up_reported_not_thrown():
    sol = shoot(3, 0.5 * math.pi**2, 1e6, rel_tol=1e-10)
    assert sol.blown_up
    assert sol.blow_radius is None or 0 < sol.blow_radius <= 1.0


def test_find_nodal_n4(pair4):
    sol = find_nodal(4, pair4.lambda1 + 2.0)
    assert sol.node_count == 1
    assert sol.u0 > 0
    assert abs(sol.profile(1.0)) <= 1e-6 * sol.u0
    assert sol.min_value < 0


def test_find_nodal_n5(pair5):
    sol = find_nodal(5, pair5.lambda1 - 0.05)
    assert sol.node_count == 1
    assert sol.u0 > 0
    assert sol.min_value < 0


def test_nodal_solution_satisfies_ode(pair5):
    sol = find_nodal(5, pair5.lambda1 - 0.05)
    lam, p = sol.lam, 7.0 / 3.0
    h = 1e-4
    worst = 0.0
    for r in np.linspace(0.05, 0.95, 100):
        u = sol.profile(r)
        d2 = (sol.profile(r + h) - 2 * u + sol.profile(r - h)) / (h * h)
        d1 = (sol.profile(r + h) - sol.profile(r - h)) / (2 * h)
        res = d2 + 4.0 / r * d1 + lam * u + abs(u) ** (p - 1.0) * u
        den = abs(lam * u) + abs(u) ** p + abs(d2) + 1e-30
        worst = max(worst, abs(res) / den)
    # second differences of the dense output limit achievable precision
    assert worst <= 1e-4


@pytest.mark.xfail(
    strict=True,
    reason="no two-nodal-region solution exists at this distance from "
    "lambda1: the nodal branch is only resolvable for eps below about "
    "0.08 on this side",
)
def test_find_nodal_n5_far_from_lambda1(pair5):
    sol = find_nodal(5, pair5.lambda1 - 0.5)
    assert sol.node_count == 1


@pytest.mark.xfail(
    strict=True,
    reason="the crossing height grows like e^(13/eps) on this side; at "
    "eps = 0.5 it is beyond double precision and no crossing is found",
)
def test_find_nodal_n4_close_to_lambda1(pair4):
    sol = find_nodal(4, pair4.lambda1 + 0.5)
    assert sol.node_count == 1


def test_continue_branch_monotonicities(pair5):
    branch = continue_branch(5, [0.05, 0.03, 0.02], pair5)
    u0s = [b.u0 for b in branch]
    assert all(b > a for a, b in zip(u0s, u0s[1:]))
    deltas = [b.delta_hat for b in branch]
    assert all(b < a for a, b in zip(deltas, deltas[1:]))
    negs = [-b.min_value for b in branch]
    assert all(b < a for a, b in zip(negs, negs[1:]))
    assert all(b.tau_hat > 0 for b in branch)


def test_extract_point_estimators(pair5):
    sol = find_nodal(5, pair5.lambda1 - 0.05)
    pt = extract_point(sol, pair5)
    assert pt.delta_hat == pytest.approx((15.0**0.75 / sol.u0) ** (2.0 / 3.0), rel=1e-12)
    assert pt.tau_hat > 0
    assert pt.d1_hat == pytest.approx(pt.tau_hat / 0.05**0.75, rel=1e-9)
    assert pt.d2_hat == pytest.approx(pt.delta_hat / 0.05**1.5, rel=1e-9)


def test_fit_synthetic_power_law():
    eps = [0.5, 0.2, 0.1, 0.05, 0.02]
    branch = [
        NodalBranchPoint(
            N=5, lam=20.19 - e, eps=e, u0=1.0,
            delta_hat=3.0 * e**1.5, tau_hat=2.0 * e**0.75,
            energy=0.0, node_count=1, min_value=-0.1,
            d1_hat=2.0, d2_hat=3.0,
        )
        for e in eps
    ]
    fits = fit_asymptotics(branch, 5)
    assert fits["slope_tau"] == pytest.approx(0.75, abs=1e-12)
    assert fits["slope_delta"] == pytest.approx(1.5, abs=1e-12)
    assert fits["d1_limit"] == pytest.approx(2.0)
    assert fits["d2_limit"] == pytest.approx(3.0)


def test_fit_requires_enough_points():
    with pytest.raises(InsufficientData):
        fit_asymptotics([], 5)


def test_branch_rejects_increasing_grid(pair5):
    with pytest.raises(ValueError):
        continue_branch(5, [0.01, 0.02], pair5)
