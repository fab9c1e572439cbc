"""Numerical kernel: adaptive quadrature, adaptive ODE integration, root finding.

Thin, contract-enforcing wrappers around the SciPy QUADPACK / RK45 / Brent
routines.  Everything here is pure: no module state, safe to call from
multiple threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.integrate
import scipy.optimize


class NumericsError(Exception):
    """Base class for kernel failures."""


class NonConvergence(NumericsError):
    """Adaptive subdivision or iteration budget exhausted."""


class NonFinite(NumericsError):
    """A NaN or infinity appeared at an interior evaluation point."""


class StepUnderflow(NumericsError):
    """ODE step size fell below h_min (stiffness or finite-time blow-up)."""


class NoBracket(NumericsError):
    """Root finder called without a sign change on [lo, hi]."""


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 0.0
    max_subdivisions: int = 200
    infinite_tail_transform: bool = True

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be nonnegative")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class OdeSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    h_init: float = 1e-4
    h_min: float = 1e-14
    h_max: float = np.inf
    dense_output: bool = True

    def __post_init__(self):
        if not (0 < self.h_min <= self.h_init <= self.h_max):
            raise ValueError("need 0 < h_min <= h_init <= h_max")


@dataclass(frozen=True)
class RootSpec:
    x_tol: float = 1e-12
    f_tol: float = 0.0
    max_iter: int = 200

    def __post_init__(self):
        if self.x_tol <= 0:
            raise ValueError("x_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def _checked(f: Callable[[float], float]) -> Callable[[float], float]:
    def wrapped(x: float) -> float:
        y = f(x)
        if not np.isfinite(y):
            raise NonFinite(f"integrand returned {y!r} at x = {x!r}")
        return y

    return wrapped


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = QuadratureSpec(),
    points: Sequence[float] | None = None,
) -> float:
    """Adaptive Gauss-Kronrod integral of ``f`` over (a, b); b may be +inf.

    Semi-infinite intervals are mapped to (0, 1] via t = 1/(1 + r - a)
    before the finite-interval adaptive scheme runs.  ``points`` lists
    interior locations (breakpoints, peaks, kinks) the subdivision should
    honor.
    """
    g = _checked(f)
    if math.isinf(b):
        if not spec.infinite_tail_transform:
            raise ValueError("b = inf requires infinite_tail_transform")
        # r = a + (1-t)/t, dr = -dt/t^2; orientation flipped to keep (0, 1].
        def transformed(t: float) -> float:
            return g(a + (1.0 - t) / t) / (t * t)

        sub_points = None
        if points is not None:
            sub_points = sorted(1.0 / (1.0 + p - a) for p in points if p > a)
        return _quad(transformed, 0.0, 1.0, spec, sub_points)
    sub_points = None
    if points is not None:
        sub_points = sorted(p for p in points if a < p < b)
    return _quad(g, a, b, spec, sub_points)


def _quad(f, a, b, spec: QuadratureSpec, points) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.integrate.IntegrationWarning)
        try:
            val, _ = scipy.integrate.quad(
                f,
                a,
                b,
                epsabs=spec.abs_tol,
                epsrel=spec.rel_tol,
                limit=max(spec.max_subdivisions, 10 * (len(points) + 1) if points else spec.max_subdivisions),
                points=points if points else None,
            )
        except scipy.integrate.IntegrationWarning as exc:
            raise NonConvergence(str(exc)) from exc
    if not np.isfinite(val):
        raise NonFinite(f"integral evaluated to {val!r}")
    return val


class Trajectory:
    """Dense ODE solution on [t0, t1]; callable at any interior time."""

    def __init__(self, sol, t0: float, t1: float, y1: np.ndarray):
        self._sol = sol
        self.t0 = t0
        self.t1 = t1
        self.y1 = y1

    def __call__(self, t):
        return self._sol(t)


def solve_ivp(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float],
    t0: float,
    t1: float,
    spec: OdeSpec = OdeSpec(),
    events=None,
) -> Trajectory:
    """Integrate y' = rhs(t, y) with an embedded RK 5(4) pair.

    Raises StepUnderflow when the controller cannot meet the tolerance
    (stiffness or blow-up), NonFinite on a NaN state.
    """
    res = scipy.integrate.solve_ivp(
        rhs,
        (t0, t1),
        np.asarray(y0, dtype=float),
        method="RK45",
        rtol=spec.rel_tol,
        atol=spec.abs_tol,
        first_step=spec.h_init,
        max_step=spec.h_max,
        dense_output=spec.dense_output,
        events=events,
    )
    if res.status == -1:
        if any(not np.isfinite(v) for v in np.atleast_1d(res.y[:, -1])):
            exc = NonFinite(res.message)
        else:
            exc = StepUnderflow(res.message)
        # partial trajectory up to the failure time, for callers that
        # treat runaway growth as an outcome rather than an error
        exc.partial = res
        raise exc
    traj = Trajectory(res.sol, t0, res.t[-1], res.y[:, -1])
    traj.raw = res
    return traj


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    spec: RootSpec = RootSpec(),
) -> float:
    """Brent root of f on [lo, hi]; requires a sign change."""
    flo, fhi = f(lo), f(hi)
    if spec.f_tol > 0:
        if abs(flo) <= spec.f_tol:
            return lo
        if abs(fhi) <= spec.f_tol:
            return hi
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise NoBracket(f"f({lo}) = {flo}, f({hi}) = {fhi} have the same sign")
    try:
        x = scipy.optimize.brentq(f, lo, hi, xtol=spec.x_tol, maxiter=spec.max_iter)
    except RuntimeError as exc:
        raise NonConvergence(str(exc)) from exc
    return x
