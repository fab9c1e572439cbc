"""First Dirichlet eigenpair of -Lap on the unit ball by radial shooting.

The radial equation u'' + ((N-1)/r) u' + mu u = 0 is integrated from a
Taylor start near r = 0; lambda_1 is the smallest mu for which u(1) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .numerics import (
    NonConvergence,
    OdeSpec,
    QuadratureSpec,
    RootSpec,
    find_root,
    solve_ivp,
)
from .radial import RadialFunction, omega

_R0 = 1e-8  # Taylor start radius, bypasses the (N-1)/r singularity
_GRID_SIZE = 4097


@dataclass(frozen=True)
class EigenPair:
    N: int
    lambda1: float
    e1: RadialFunction
    e1_at_0: float
    l2_norm: float


def _radial_helmholtz_rhs(N: int, mu: float):
    def rhs(r, y):
        u, v = y
        return (v, -(N - 1) / r * v - mu * u)

    return rhs


def _shoot_endpoint(N: int, mu: float, ode_spec: OdeSpec):
    """Dense solution of the regular radial mode with u(0) = 1, u'(0) = 0."""
    u0 = 1.0 - mu * _R0**2 / (2.0 * N)
    v0 = -mu * _R0 / N
    return solve_ivp(_radial_helmholtz_rhs(N, mu), [u0, v0], _R0, 1.0, ode_spec)


def compute_eigenpair(N: int, tol: float = 1e-12) -> EigenPair:
    """Smallest Dirichlet eigenvalue of the unit ball and its radial eigenfunction.

    The eigenfunction is stored as a cubic interpolant on a 4097-point
    Chebyshev-spaced grid, rescaled to unit L^2 norm (with the volume
    weight) and positive sign.
    """
    if N not in (3, 4, 5, 6):
        raise ValueError(f"N must be in 3..6, got {N}")
    ode_spec = OdeSpec(rel_tol=1e-12, abs_tol=1e-14, h_init=1e-6)

    def endpoint(mu):
        return _shoot_endpoint(N, mu, ode_spec).y1[0]

    lam = _bracket_and_refine(endpoint, 1.0, 2.0 * N * math.pi**2, tol)

    grid = 0.5 * (1.0 - np.cos(np.linspace(0.0, math.pi, _GRID_SIZE)))
    traj = _shoot_endpoint(N, lam, ode_spec)
    vals = np.empty(_GRID_SIZE)
    vals[0] = 1.0
    inner = grid[1:] < _R0
    vals[1:][inner] = 1.0 - lam * grid[1:][inner] ** 2 / (2.0 * N)
    vals[1:][~inner] = traj(grid[1:][~inner])[0]
    vals[-1] = 0.0

    spline = CubicSpline(grid, vals)
    norm_sq = _spline_volume_integral(spline, grid, N, power=2)
    scale = 1.0 / math.sqrt(norm_sq)
    nspline = CubicSpline(grid, scale * vals)
    dspline = nspline.derivative()
    e1 = RadialFunction(
        value=lambda r: float(nspline(r)),
        derivative=lambda r: float(dspline(r)),
        N=N,
    )
    return EigenPair(N=N, lambda1=lam, e1=e1, e1_at_0=scale, l2_norm=1.0)


def _spline_volume_integral(spline, grid, N, power):
    from .numerics import integrate

    w = omega(N)
    return integrate(
        lambda r: float(spline(r)) ** power * w * r ** (N - 1),
        0.0,
        1.0,
        QuadratureSpec(rel_tol=1e-13, abs_tol=1e-15),
    )


def _bracket_and_refine(endpoint, mu_lo, mu_hi, tol, panels=64):
    mus = np.linspace(mu_lo, mu_hi, panels + 1)
    f_prev = endpoint(mus[0])
    for mu_a, mu_b in zip(mus[:-1], mus[1:]):
        f_next = endpoint(mu_b)
        if f_prev * f_next < 0:
            return find_root(endpoint, mu_a, mu_b, RootSpec(x_tol=tol))
        f_prev = f_next
    raise NonConvergence("no sign change of the shooting endpoint in the mu sweep")


def second_eigenvalue(N: int, lambda1: float, tol: float = 1e-10) -> float:
    """Next radial Dirichlet eigenvalue past lambda1 (simplicity sanity check)."""
    ode_spec = OdeSpec(rel_tol=1e-11, abs_tol=1e-13, h_init=1e-6)

    def endpoint(mu):
        return _shoot_endpoint(N, mu, ode_spec).y1[0]

    return _bracket_and_refine(endpoint, lambda1 + 1.0, 8.0 * N * math.pi**2, tol, panels=256)


def e1_functionals(pair: EigenPair) -> dict:
    """e1(0), the L^2 normalization, and the critical-power integral of e1."""
    N = pair.N
    p1 = 2.0 * N / (N - 2.0)
    spec = QuadratureSpec(rel_tol=1e-12)
    return {
        "e1_at_0": pair.e1_at_0,
        "int_e1_sq": pair.e1.volume_integral(lambda u: u * u, spec),
        "int_e1_p1": pair.e1.volume_integral(lambda u: abs(u) ** p1, spec),
    }
