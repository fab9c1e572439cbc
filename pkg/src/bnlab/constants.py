"""Quadrature of the expansion coefficients: universal bubble integrals,
the dimension-4 triple (b1, b2, b3), the dimension-5 quadruple (a1..a4),
and the linear-theory constants entering the 2x2 reduction systems.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from .bubble import BubbleParams
from .numerics import QuadratureSpec, integrate
from .radial import omega
from .spectrum import EigenPair, e1_functionals


class Divergent(ArithmeticError):
    """Requested integral diverges (log-correction regime)."""


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class UniversalIntegrals:
    N: int
    int_U_sq: float | None  # None flags the divergent N <= 4 case
    int_U_p: float
    int_U_p1: float
    sobolev_S: float


@dataclass(frozen=True)
class CoeffsN4:
    b1: float
    b2: float
    b3: float


@dataclass(frozen=True)
class CoeffsN5:
    a1: float
    a2: float
    a3: float
    a4: float


@dataclass(frozen=True)
class LinearTheoryConstants:
    N: int
    A: float
    A0: float
    B: float
    B0: float
    C0: float | None
    D0: float
    # separate fields for the (PZ, PZ)-expansion constants of the same names,
    # kept apart to avoid a silent unit clash with A0/B0 above
    B_pz: float | None = None
    B0_pz: float | None = None


def _radial_tail_integral(power_num: int, power_den: float, spec: QuadratureSpec) -> float:
    """Integral of r^power_num / (1 + r^2)^power_den over (0, inf)."""
    return integrate(
        lambda r: r**power_num / (1.0 + r * r) ** power_den,
        0.0,
        math.inf,
        spec,
        points=[1.0, 10.0, 100.0],
    )


def universal_integrals(N: int, spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-13)) -> UniversalIntegrals:
    """Whole-space integrals of the unit bubble, reduced to radial form.

    The squared-bubble integral diverges logarithmically for N = 4 (and
    outright for N = 3); those cases carry None instead of a number.
    """
    if N not in (3, 4, 5, 6):
        raise ValueError(f"N must be in 3..6, got {N}")
    params = BubbleParams(N=N, delta=1.0)
    alpha = params.alpha
    p = params.p
    w = omega(N)
    int_U_p = alpha**p * w * _radial_tail_integral(N - 1, (N + 2) / 2.0, spec)
    int_U_p1 = alpha ** (p + 1.0) * w * _radial_tail_integral(N - 1, float(N), spec)
    if N >= 5:
        int_U_sq = alpha**2 * w * _radial_tail_integral(N - 1, float(N - 2), spec)
    else:
        int_U_sq = None
    S = int_U_p1 ** (2.0 / N)
    return UniversalIntegrals(N=N, int_U_sq=int_U_sq, int_U_p=int_U_p, int_U_p1=int_U_p1, sobolev_S=S)


def require_int_U_sq(uni: UniversalIntegrals) -> float:
    if uni.int_U_sq is None:
        raise Divergent(f"integral of U^2 over R^{uni.N} diverges")
    return uni.int_U_sq


def sobolev_rayleigh(N: int, spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-13)) -> float:
    """Sobolev constant from the Rayleigh quotient of the unit bubble.

    Independent of the route via the U^(p+1) integral: the gradient
    integral is quadrated directly.
    """
    params = BubbleParams(N=N, delta=1.0)
    alpha = params.alpha
    w = omega(N)
    # |U'|^2 = alpha^2 (N-2)^2 r^2 / (1+r^2)^N
    grad_sq = alpha**2 * (N - 2) ** 2 * w * _radial_tail_integral(N + 1, float(N), spec)
    int_U_p1 = alpha ** (params.p + 1.0) * w * _radial_tail_integral(N - 1, float(N), spec)
    return grad_sq / int_U_p1 ** ((N - 2.0) / N)


def coeffs_n4(pair: EigenPair, uni: UniversalIntegrals) -> CoeffsN4:
    if pair.N != 4 or uni.N != 4:
        raise DimensionMismatch("coeffs_n4 needs the N = 4 eigenpair and integrals")
    fns = e1_functionals(pair)
    alpha4 = BubbleParams(N=4, delta=1.0).alpha
    return CoeffsN4(
        b1=0.5 * fns["int_e1_sq"],
        b2=fns["e1_at_0"] * uni.int_U_p,
        b3=0.5 * pair.lambda1 * omega(4) * alpha4**2,
    )


def coeffs_n5(pair: EigenPair, uni: UniversalIntegrals) -> CoeffsN5:
    if pair.N != 5 or uni.N != 5:
        raise DimensionMismatch("coeffs_n5 needs the N = 5 eigenpair and integrals")
    fns = e1_functionals(pair)
    p1 = 10.0 / 3.0
    return CoeffsN5(
        a1=0.5 * fns["int_e1_sq"],
        a2=fns["int_e1_p1"] / p1,
        a3=fns["e1_at_0"] * uni.int_U_p,
        a4=0.5 * pair.lambda1 * require_int_U_sq(uni),
    )


def linear_constants(
    N: int,
    pair: EigenPair,
    d2: float | None = None,
    spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-12),
) -> LinearTheoryConstants:
    """Constants of the 2x2 near-kernel systems: A, A0, B, B0, C0, D0.

    C0 depends on the second concentration ratio and is only defined for
    N = 5; pass d2 to get it, otherwise it is None.
    """
    if N not in (4, 5):
        raise ValueError("linear constants defined for N in {4, 5}")
    if pair.N != N:
        raise DimensionMismatch("eigenpair dimension does not match N")
    params = BubbleParams(N=N, delta=1.0)
    alpha, p = params.alpha, params.p
    w = omega(N)

    A = alpha ** (p + 1.0) * w * integrate(
        lambda r: r ** (N - 1) * (r * r - 1.0) ** 2 / (1.0 + r * r) ** (N + 2),
        0.0, math.inf, spec, points=[1.0, 10.0],
    )
    # regular part of the ball Green function at the center is 1
    A0 = alpha**p * (N - 2) / 2.0 * w * integrate(
        lambda r: r ** (N - 1) * (1.0 - r * r) / (1.0 + r * r) ** ((N + 4) / 2.0),
        0.0, math.inf, spec, points=[1.0, 10.0],
    )
    # e1 against the Green singularity |x|^(2-N): radially this is just r dr
    B = w * integrate(lambda r: pair.e1(r) * r, 0.0, 1.0, spec)
    B0 = alpha * (N - 2) / 2.0 * pair.e1.volume_integral(spec=spec)
    C0 = None
    if N == 5 and d2 is not None:
        C0 = w * integrate(
            lambda r: r ** (N - 1) * r * r / (1.0 + r * r) ** 7
            * (35.0 * (r * r - 1.0) / (1.0 + r * r) + 0.5 / d2 * (7.0 - 3.0 * r * r)) ** 2,
            0.0, math.inf, spec, points=[1.0, 10.0],
        )
    B_pz = B0_pz = None
    if N == 4:
        B_pz = integrate(
            lambda r: r**3 * (1.0 - r * r) ** 2 / (1.0 + r * r) ** 6 * w,
            0.0, math.inf, spec, points=[1.0, 10.0],
        )
        B0_pz = integrate(
            lambda r: r**3 * (1.0 - r * r) / (1.0 + r * r) ** 4 * w,
            0.0, math.inf, spec, points=[1.0, 10.0],
        )
    return LinearTheoryConstants(
        N=N, A=A, A0=A0, B=B, B0=B0, C0=C0, D0=pair.lambda1, B_pz=B_pz, B0_pz=B0_pz
    )


def reduction_determinant(consts: LinearTheoryConstants, delta: float) -> float:
    """Determinant of the 2x2 near-kernel system at concentration scale delta."""
    lam1 = consts.D0
    if consts.N == 4:
        m00 = consts.A - consts.A0 * delta**2
        m01 = lam1 * (consts.B - consts.B0) * delta**2
        m10 = lam1 * (consts.B - consts.B0)
        m11 = lam1 * consts.D0
    else:
        m00 = consts.A
        m01 = lam1 * consts.B * delta**2.5
        m10 = lam1 * consts.B * delta**0.5
        m11 = lam1 * consts.D0
    return m00 * m11 - m01 * m10


_cache_lock = threading.Lock()
_cache: dict = {}


def cached_universal_integrals(N: int) -> UniversalIntegrals:
    """Idempotent per-dimension cache; first concurrent fills race benignly."""
    key = ("uni", N)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        return hit
    val = universal_integrals(N)
    with _cache_lock:
        _cache.setdefault(key, val)
        return _cache[key]
