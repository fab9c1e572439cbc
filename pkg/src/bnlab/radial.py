"""Radial functions on [0, R] with the N-dimensional volume weight."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .numerics import QuadratureSpec, integrate


def omega(N: int) -> float:
    """Surface area of the unit sphere in R^N (omega_3 = 4 pi, omega_4 = 2 pi^2)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


@dataclass(frozen=True)
class RadialFunction:
    """Scalar function of radius on [0, R], viewed as a radial function on R^N.

    ``value`` and ``derivative`` are plain callables of r; quadratures carry
    the volume weight omega_N r^(N-1).
    """

    value: Callable[[float], float]
    derivative: Callable[[float], float]
    N: int
    R: float = 1.0
    breakpoints: tuple = field(default_factory=tuple)

    def __call__(self, r: float) -> float:
        return self.value(r)

    def deriv(self, r: float) -> float:
        return self.derivative(r)

    def volume_integral(
        self,
        transform: Callable[[float], float] | None = None,
        spec: QuadratureSpec = QuadratureSpec(),
        points: Sequence[float] | None = None,
    ) -> float:
        """Integral of transform(u(r)) over the ball, i.e. with weight omega_N r^(N-1)."""
        w = omega(self.N)
        if transform is None:
            integrand = lambda r: self.value(r) * w * r ** (self.N - 1)
        else:
            integrand = lambda r: transform(self.value(r)) * w * r ** (self.N - 1)
        pts = list(self.breakpoints)
        if points is not None:
            pts += list(points)
        return integrate(integrand, 0.0, self.R, spec, points=pts or None)
