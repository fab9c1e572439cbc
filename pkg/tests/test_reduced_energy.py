import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from bnlab.bubble import BubbleParams, eval_U, project_PU
from bnlab.constants import CoeffsN4, CoeffsN5, coeffs_n4, coeffs_n5
from bnlab.numerics import QuadratureSpec, integrate
from bnlab.radial import omega
from bnlab.reduced_energy import (
    AnsatzParams,
    ansatz_energy_gap,
    build_ansatz,
    critical_points,
    energy,
    g1,
    g2,
    g_of_s2,
    psi,
    psi_gradient,
    psi_gradient_check,
)


def test_psi_boundary_limit():
    c = CoeffsN4(b1=1.0, b2=2.0, b3=3.0)
    for s2 in (0.5, 1.0, 1.9):
        assert psi(0.0, s2, c) == pytest.approx(-c.b1 * g_of_s2(s2) ** 2, rel=1e-14)


def test_psi_value_at_critical_point():
    c = CoeffsN4(b1=0.7, b2=2.0, b3=3.0)
    s1 = c.b2 / (2.0 * c.b3)
    assert psi(s1, 1.0, c) == pytest.approx(-c.b1 + c.b2**2 / (4.0 * c.b3), rel=1e-13)


def test_psi_gradient_vanishes_at_critical_point():
    c = CoeffsN4(b1=0.7, b2=2.0, b3=3.0)
    gs1, gs2 = psi_gradient(c.b2 / (2.0 * c.b3), 1.0, c)
    assert abs(gs1) < 1e-12 and abs(gs2) < 1e-12


def test_finite_difference_gradient_matches_closed_form():
    rng = np.random.default_rng(5)
    c = CoeffsN4(b1=0.6, b2=1.7, b3=2.9)
    h = 1e-6
    for _ in range(50):
        s1, s2 = rng.uniform(0.1, 3.0, 2)
        fd1 = (psi(s1 + h, s2, c) - psi(s1 - h, s2, c)) / (2 * h)
        fd2 = (psi(s1, s2 + h, c) - psi(s1, s2 - h, c)) / (2 * h)
        g1v, g2v = psi_gradient(s1, s2, c)
        assert fd1 == pytest.approx(g1v, rel=1e-6, abs=1e-6)
        assert fd2 == pytest.approx(g2v, rel=1e-6, abs=1e-6)


def test_g1_argmax_matches_closed_form():
    c = CoeffsN5(a1=1.0, a2=1.0, a3=1.0, a4=1.0)
    d1 = minimize_scalar(lambda d: -g1(d, c), bounds=(1e-3, 10.0), method="bounded",
                         options={"xatol": 1e-12}).x
    assert d1 == pytest.approx((3.0 / 5.0) ** 0.75, abs=1e-7)


def test_g2_argmax_matches_closed_form():
    c = CoeffsN5(a1=1.0, a2=1.0, a3=1.0, a4=1.0)
    d2 = minimize_scalar(lambda d: -g2(1.0, d, c), bounds=(1e-3, 10.0), method="bounded",
                         options={"xatol": 1e-12}).x
    assert d2 == pytest.approx(0.5625, abs=1e-7)


def test_critical_points_unit_coefficients():
    cp4 = critical_points(4, CoeffsN4(b1=1.0, b2=1.0, b3=1.0))
    assert cp4.coordinates == pytest.approx((0.5, 1.0), rel=1e-14)
    assert cp4.classification == "max"  # discriminant 1 - 4 < 0
    cp5 = critical_points(5, CoeffsN5(a1=1.0, a2=1.0, a3=1.0, a4=1.0))
    assert cp5.coordinates[0] == pytest.approx((3.0 / 5.0) ** 0.75, rel=1e-13)
    assert cp5.coordinates[1] == pytest.approx((0.75 * cp5.coordinates[0]) ** 2, rel=1e-13)


def test_degenerate_discriminant_classification():
    # b2^2 = 4 b1 b3 exactly
    cp = critical_points(4, CoeffsN4(b1=1.0, b2=2.0, b3=1.0))
    assert cp.classification == "degenerate"


@settings(max_examples=40, deadline=None)
@given(c=st.floats(1e-3, 1e3))
def test_critical_point_invariant_under_coefficient_scaling(c):
    base = critical_points(4, CoeffsN4(b1=0.5, b2=169.0, b3=1159.0))
    scaled = critical_points(4, CoeffsN4(b1=0.5 * c, b2=169.0 * c, b3=1159.0 * c))
    assert scaled.coordinates[0] == pytest.approx(base.coordinates[0], rel=1e-12)
    assert scaled.coordinates[1] == base.coordinates[1]


@settings(max_examples=40, deadline=None)
@given(c=st.floats(1e-3, 1e3))
def test_n5_critical_point_invariant_under_ratio_preserving_scaling(c):
    base = critical_points(5, CoeffsN5(a1=0.5, a2=0.26, a3=1144.0, a4=9092.0))
    scaled = critical_points(
        5, CoeffsN5(a1=0.5 * c, a2=0.26 * c, a3=1144.0 * c, a4=9092.0 * c)
    )
    assert scaled.coordinates[0] == pytest.approx(base.coordinates[0], rel=1e-12)
    assert scaled.coordinates[1] == pytest.approx(base.coordinates[1], rel=1e-12)


def test_ansatz_reduces_to_projection_without_eigen_part(pair5):
    # d1 -> 0 sends tau -> 0, leaving the pure projected bubble
    p = AnsatzParams(N=5, eps=1e-3, d1=1e-5, d2=1.0, eta=1e-6)
    v = build_ansatz(p, pair5)
    pu = project_PU(BubbleParams(N=5, delta=p.delta))
    tau = 1e-5 * 1e-3**0.75
    for r in (0.0, 0.2, 0.5, 0.9, 1.0):
        assert v(r) == pytest.approx(pu(r), abs=3.0 * tau)


def test_ansatz_boundary_and_sign_structure(pair5):
    p = AnsatzParams(N=5, eps=1e-3, d1=1.0, d2=1.0)
    v = build_ansatz(p, pair5)
    assert v(1.0) == pytest.approx(0.0, abs=1e-12)
    assert v(0.0) > 0
    rr = np.linspace(1e-6, 1.0 - 1e-9, 10000)
    vals = np.array([v(r) for r in rr])
    changes = int(np.sum(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0))
    assert changes == 1
    mid = (rr >= 0.3) & (rr <= 0.9)
    assert (vals[mid] < 0).all()


def test_energy_of_zero_function(pair5):
    from bnlab.radial import RadialFunction

    zero = RadialFunction(value=lambda r: 0.0, derivative=lambda r: 0.0, N=5)
    assert energy(zero, 10.0, 5) == pytest.approx(0.0, abs=1e-14)


def test_energy_of_pure_eigen_component(pair5):
    # J(-tau e1) = (tau^2/2)(lambda1 - lam) - tau^(p+1)/(p+1) int e1^(p+1)
    from bnlab.radial import RadialFunction
    from bnlab.spectrum import e1_functionals

    tau, lam = 0.3, 18.0
    u = RadialFunction(
        value=lambda r: -tau * pair5.e1(r),
        derivative=lambda r: -tau * pair5.e1.derivative(r),
        N=5,
    )
    p1 = 10.0 / 3.0
    fns = e1_functionals(pair5)
    oracle = 0.5 * tau**2 * (pair5.lambda1 - lam) - tau**p1 / p1 * fns["int_e1_p1"]
    assert energy(u, lam, 5) == pytest.approx(oracle, rel=1e-9)


def test_energy_expansion_tracks_g1(pair5, uni5):
    c = coeffs_n5(pair5, uni5)
    cp = critical_points(5, c)
    target = g1(cp.coordinates[0], c)
    p = AnsatzParams(N=5, eps=1e-3, d1=cp.coordinates[0], d2=cp.coordinates[1])
    gap = ansatz_energy_gap(p, pair5, uni5)
    assert gap / 1e-3**2.5 == pytest.approx(target, rel=0.15)


def test_gradient_ratio_sign_away_from_critical_s1(pair4, uni4):
    c = coeffs_n4(pair4, uni4)
    cp = critical_points(4, c)
    p = AnsatzParams(N=4, eps=0.2, s1=2.0 * cp.coordinates[0], s2=1.0)
    r1, _ = psi_gradient_check(p, pair4, uni4)
    assert r1 < 0  # sign of b2 - 4 b3 s1bar = -b2


def test_gradient_ratios_shrink_at_critical_point(pair4, uni4):
    c = coeffs_n4(pair4, uni4)
    cp = critical_points(4, c)
    mags = []
    for eps in (0.3, 0.2, 0.12):
        p = AnsatzParams(N=4, eps=eps, s1=cp.coordinates[0], s2=1.0)
        r1, r2 = psi_gradient_check(p, pair4, uni4)
        mags.append(math.hypot(r1, r2))
    assert mags[-1] < mags[0]


@pytest.mark.xfail(
    strict=True,
    reason="off s2 = 1 the exact derivative lives on the smaller scale "
    "e^(-(g+1)/eps), with sign -g'(s2) b2 s1 < 0 for s2 > 1; the "
    "positive-sign prediction from the leading Psi term is not what the "
    "finite-difference ratio converges to",
)
def test_gradient_ratio_sign_away_from_critical_s2(pair4, uni4):
    c = coeffs_n4(pair4, uni4)
    cp = critical_points(4, c)
    p = AnsatzParams(N=4, eps=0.2, s1=cp.coordinates[0], s2=2.0)
    _, r2 = psi_gradient_check(p, pair4, uni4)
    predicted = 2.0 * (2.0 - 1.0) * (-2.0 * c.b1 * g_of_s2(2.0) + c.b2 * cp.coordinates[0])
    assert r2 * predicted > 0
