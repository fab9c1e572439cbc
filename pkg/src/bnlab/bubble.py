"""Standard bubble family on R^N, its concentration derivative, and their
projections onto H^1_0 of the unit ball; Green/Robin data of the ball.

On the ball every harmonic correction is a radial harmonic function regular
at the origin, hence a constant: the projections have exact closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .radial import RadialFunction, omega


class DomainError(ValueError):
    """Radius outside the unit ball."""


@dataclass(frozen=True)
class BubbleParams:
    """Concentration family parameters: dimension N and scale delta > 0."""

    N: int
    delta: float

    def __post_init__(self):
        if self.N not in (3, 4, 5, 6):
            raise ValueError(f"N must be in 3..6, got {self.N}")
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    @property
    def alpha(self) -> float:
        """[N(N-2)]^((N-2)/4), the normalization making -Lap U = U^p hold."""
        return (self.N * (self.N - 2)) ** ((self.N - 2) / 4.0)

    @property
    def p(self) -> float:
        return (self.N + 2) / (self.N - 2)


@dataclass(frozen=True)
class BallGreenData:
    N: int

    @property
    def omega_N(self) -> float:
        return omega(self.N)

    @property
    def gamma_N(self) -> float:
        return 1.0 / ((self.N - 2) * self.omega_N)


def eval_U(params: BubbleParams, r: float) -> float:
    """Bubble value alpha_N delta^((N-2)/2) / (delta^2 + r^2)^((N-2)/2)."""
    k = (params.N - 2) / 2.0
    return params.alpha * params.delta**k / (params.delta**2 + r * r) ** k


def eval_U_deriv(params: BubbleParams, r: float) -> float:
    k = (params.N - 2) / 2.0
    return (
        -params.alpha * (params.N - 2) * params.delta**k * r / (params.delta**2 + r * r) ** (k + 1)
    )


def eval_Z(params: BubbleParams, r: float) -> float:
    """d/d(delta) of the bubble: alpha (N-2)/2 d^((N-4)/2) (r^2-d^2)/(d^2+r^2)^(N/2)."""
    d = params.delta
    return (
        params.alpha
        * (params.N - 2)
        / 2.0
        * d ** ((params.N - 4) / 2.0)
        * (r * r - d * d)
        / (d * d + r * r) ** (params.N / 2.0)
    )


def eval_Z_deriv(params: BubbleParams, r: float) -> float:
    d = params.delta
    c = params.alpha * (params.N - 2) / 2.0 * d ** ((params.N - 4) / 2.0)
    s = d * d + r * r
    return c * r * (2.0 * s - params.N * (r * r - d * d)) / s ** (params.N / 2.0 + 1)


def project_PU(params: BubbleParams) -> RadialFunction:
    """H^1_0(B_1) projection of the bubble: U_delta(r) - U_delta(1)."""
    boundary = eval_U(params, 1.0)
    return RadialFunction(
        value=lambda r: eval_U(params, r) - boundary,
        derivative=lambda r: eval_U_deriv(params, r),
        N=params.N,
        breakpoints=_bubble_scales(params.delta),
    )


def project_PZ(params: BubbleParams) -> RadialFunction:
    """H^1_0(B_1) projection of the delta-derivative: Z_delta(r) - Z_delta(1)."""
    boundary = eval_Z(params, 1.0)
    return RadialFunction(
        value=lambda r: eval_Z(params, r) - boundary,
        derivative=lambda r: eval_Z_deriv(params, r),
        N=params.N,
        breakpoints=_bubble_scales(params.delta),
    )


def _bubble_scales(delta: float) -> tuple:
    """Quadrature breakpoints spanning the concentration scale up to r = 1."""
    pts = []
    s = delta
    while s < 0.5:
        pts.append(s)
        s *= 8.0
    return tuple(pts)


def green_ball(data: BallGreenData, r: float) -> float:
    """Green function of the ball at the center: gamma_N (r^(2-N) - 1)."""
    if r <= 0.0 or r > 1.0:
        raise DomainError(f"green_ball needs 0 < r <= 1, got {r}")
    return data.gamma_N * (r ** (2.0 - data.N) - 1.0)


def robin_center(data: BallGreenData) -> float:
    """Regular part of the Green function at the center: H(0,0) = 1 on the ball."""
    return 1.0
