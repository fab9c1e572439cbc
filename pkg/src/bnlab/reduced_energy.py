"""Reduced-energy expansions on the two-parameter ansatz and their critical
points, plus exact numerical evaluation of the energy and of the ansatz
residual.

The ansatz is the projected bubble minus a small multiple of the first
eigenfunction.  Its energy differs from the critical level S^(N/2)/N by an
exponentially or algebraically small amount, so the energy is evaluated
through a cancellation-free decomposition rather than naive subtraction of
two O(100) quadratures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bubble import BubbleParams, eval_U, eval_U_deriv, project_PU
from .constants import CoeffsN4, CoeffsN5, UniversalIntegrals, require_int_U_sq
from .numerics import NoBracket, QuadratureSpec, RootSpec, find_root, integrate
from .radial import RadialFunction, omega
from .spectrum import EigenPair

_GAP_SPEC = QuadratureSpec(rel_tol=1e-13, abs_tol=1e-16)


class PrecisionLoss(ArithmeticError):
    """Exponential scale factor underflowed double precision."""


def g_of_s2(s2: float) -> float:
    """Second-slot rescaling of the exponential amplitude: (s2 - 1)^2 + 1."""
    return (s2 - 1.0) ** 2 + 1.0


@dataclass(frozen=True)
class AnsatzParams:
    """Concentration parameters in the blow-up scalings.

    N = 4: lambda = lambda1 + eps, delta = eps e^(-1/eps) s1,
           tau = e^(-g(s2)/eps).
    N = 5: lambda = lambda1 - eps, tau = eps^(3/4) d1, delta = eps^(3/2) d2.
    """

    N: int
    eps: float
    s1: float | None = None
    s2: float | None = None
    d1: float | None = None
    d2: float | None = None
    eta: float = 1e-6

    def __post_init__(self):
        if self.N == 4:
            if self.s1 is None or self.s2 is None:
                raise ValueError("N = 4 ansatz needs (s1, s2)")
            coords = (self.s1, self.s2)
        elif self.N == 5:
            if self.d1 is None or self.d2 is None:
                raise ValueError("N = 5 ansatz needs (d1, d2)")
            coords = (self.d1, self.d2)
        else:
            raise ValueError("ansatz defined for N in {4, 5}")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        for c in coords:
            if not (self.eta < c < 1.0 / self.eta):
                raise ValueError(f"coordinate {c} outside ({self.eta}, {1 / self.eta})")

    @property
    def log_tau(self) -> float:
        if self.N == 4:
            return -g_of_s2(self.s2) / self.eps
        return 0.75 * math.log(self.eps) + math.log(self.d1)

    @property
    def log_delta(self) -> float:
        if self.N == 4:
            return math.log(self.eps * self.s1) - 1.0 / self.eps
        return 1.5 * math.log(self.eps) + math.log(self.d2)

    @property
    def tau(self) -> float:
        return math.exp(self.log_tau)

    @property
    def delta(self) -> float:
        return math.exp(self.log_delta)

    def lam(self, lambda1: float) -> float:
        return lambda1 + self.eps if self.N == 4 else lambda1 - self.eps


def psi(s1: float, s2: float, c: CoeffsN4) -> float:
    """Reduced energy in the exponential scaling: -b1 g^2 + b2 g s1 - b3 s1^2."""
    g = g_of_s2(s2)
    return -c.b1 * g * g + c.b2 * g * s1 - c.b3 * s1 * s1


def psi_gradient(s1: float, s2: float, c: CoeffsN4) -> tuple[float, float]:
    g = g_of_s2(s2)
    dg = 2.0 * (s2 - 1.0)
    return (c.b2 * g - 2.0 * c.b3 * s1, (-2.0 * c.b1 * g + c.b2 * s1) * dg)


def g1(d1: float, c: CoeffsN5) -> float:
    """First-slot reduced energy: a1 d1^2 - a2 d1^(10/3)."""
    return c.a1 * d1 * d1 - c.a2 * d1 ** (10.0 / 3.0)


def g2(d1: float, d2: float, c: CoeffsN5) -> float:
    """Second-slot reduced energy: a3 d1 d2^(3/2) - a4 d2^2."""
    return c.a3 * d1 * d2**1.5 - c.a4 * d2 * d2


@dataclass(frozen=True)
class CriticalPoint:
    coordinates: tuple[float, float]
    classification: str  # max | saddle | degenerate
    hessian_det: float
    hessian_trace: float


def critical_points(N: int, coeffs) -> CriticalPoint:
    """Closed-form stationary point of the reduced energy.

    N = 4: (b2/(2 b3), 1), a maximum iff b2^2 - 4 b1 b3 < 0.
    N = 5: d1 = (3 a1/(5 a2))^(3/4), d2 = ((3/4)(a3/a4) d1)^2; each slot is
    strictly concave through its stationary point.
    """
    if N == 4:
        c: CoeffsN4 = coeffs
        s1 = c.b2 / (2.0 * c.b3)
        disc = c.b2 * c.b2 - 4.0 * c.b1 * c.b3
        h11 = -2.0 * c.b3
        h22 = 2.0 * (-2.0 * c.b1 + c.b2 * s1)  # g''(1) = 2, g'(1) = 0
        det = h11 * h22
        if disc < 0:
            kind = "max"
        elif disc == 0:
            kind = "degenerate"
        else:
            kind = "saddle"
        return CriticalPoint((s1, 1.0), kind, det, h11 + h22)
    if N == 5:
        c5: CoeffsN5 = coeffs
        d1 = (3.0 * c5.a1 / (5.0 * c5.a2)) ** 0.75
        d2 = (0.75 * c5.a3 / c5.a4 * d1) ** 2
        h11 = 2.0 * c5.a1 - (10.0 / 3.0) * (7.0 / 3.0) * c5.a2 * d1 ** (4.0 / 3.0)
        h22 = 0.75 * c5.a3 * d1 / math.sqrt(d2) - 2.0 * c5.a4
        return CriticalPoint((d1, d2), "max", h11 * h22, h11 + h22)
    raise ValueError("critical points defined for N in {4, 5}")


def build_ansatz(p: AnsatzParams, pair: EigenPair) -> RadialFunction:
    """The two-piece ansatz: projected bubble minus tau times e1."""
    bp = BubbleParams(N=p.N, delta=p.delta)
    pu = project_PU(bp)
    tau = p.tau
    e1 = pair.e1
    return RadialFunction(
        value=lambda r: pu(r) - tau * e1(r),
        derivative=lambda r: pu.deriv(r) - tau * e1.deriv(r),
        N=p.N,
        breakpoints=pu.breakpoints,
    )


def energy(u: RadialFunction, lam: float, N: int, spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-12)) -> float:
    """Energy functional: half the Dirichlet norm minus the critical-power
    and mass terms, all with the volume weight."""
    p1 = 2.0 * N / (N - 2.0)
    w = omega(N)
    pts = list(u.breakpoints) or None
    grad = integrate(lambda r: u.deriv(r) ** 2 * w * r ** (N - 1), 0.0, u.R, spec, points=pts)
    power = integrate(lambda r: abs(u(r)) ** p1 * w * r ** (N - 1), 0.0, u.R, spec, points=pts)
    mass = integrate(lambda r: u(r) ** 2 * w * r ** (N - 1), 0.0, u.R, spec, points=pts)
    return 0.5 * grad - power / p1 - 0.5 * lam * mass


def _log_points(delta: float, hi: float = 0.5) -> list[float]:
    pts, s = [], delta
    while s < hi:
        pts.append(s)
        s *= 8.0
    return pts


def _power_diff(u: float, c: float, q: float) -> float:
    """|u - c|^q - u^q for u > 0, stable when c << u."""
    x = c / u
    if x < 0.5:
        return u**q * math.expm1(q * math.log1p(-x))
    v = u - c
    return abs(v) ** q - u**q


def ansatz_energy_gap(p: AnsatzParams, pair: EigenPair, uni: UniversalIntegrals) -> float:
    """Energy of the ansatz minus the critical level S^(N/2)/N.

    Exact algebraic decomposition: the S^(N/2) pieces of the Dirichlet and
    critical-power integrals cancel in closed form, leaving only tail
    integrals of the bubble outside the ball and genuinely small interior
    terms.  Accurate to roughly 1e-13 absolute where naive subtraction of
    the two big quadratures would lose everything.
    """
    N = p.N
    lam1 = pair.lambda1
    lam = p.lam(lam1)
    tau = p.tau
    bp = BubbleParams(N=N, delta=p.delta)
    alpha, pw = bp.alpha, bp.p
    w = omega(N)
    U = lambda r: eval_U(bp, r)
    U1 = eval_U(bp, 1.0)
    e1 = pair.e1
    S_half = uni.int_U_p1  # S^(N/2)
    pts = _log_points(p.delta)

    # bubble tails outside the unit ball
    tail_grad = integrate(
        lambda r: eval_U_deriv(bp, r) ** 2 * w * r ** (N - 1), 1.0, math.inf, _GAP_SPEC
    )
    tail_pow = integrate(
        lambda r: U(r) ** (pw + 1.0) * w * r ** (N - 1), 1.0, math.inf, _GAP_SPEC
    )

    # interior difference of the critical-power terms, stable near the peak;
    # the sign change of the ansatz is an explicit breakpoint
    try:
        rstar = find_root(
            lambda r: U(r) - (U1 + tau * e1(r)), p.delta, 1.0 - 1e-12, RootSpec(x_tol=1e-14)
        )
    except NoBracket:
        rstar = None
    dpts = pts + ([rstar] if rstar else [])

    def diff_integrand(r):
        return _power_diff(U(r), U1 + tau * e1(r), pw + 1.0) * w * r ** (N - 1)

    interior_diff = integrate(diff_integrand, 0.0, 1.0, _GAP_SPEC, points=dpts)

    # small quadratic pieces of the projected bubble
    int_pu_sq = integrate(
        lambda r: (U(r) - U1) ** 2 * w * r ** (N - 1), 0.0, 1.0, _GAP_SPEC, points=pts
    )
    int_pu_e1 = integrate(
        lambda r: (U(r) - U1) * e1(r) * w * r ** (N - 1), 0.0, 1.0, _GAP_SPEC, points=pts
    )

    q1 = 1.0 / (pw + 1.0)
    return (
        -0.5 * tail_grad
        + q1 * (tail_pow - interior_diff)
        - 0.5 * lam * int_pu_sq
        + tau * (lam - lam1) * int_pu_e1
        + 0.5 * tau * tau * (lam1 - lam)
    )


def residual_norm(p: AnsatzParams, pair: EigenPair, spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-11)) -> float:
    """L^(2N/(N+2)) norm of the PDE defect of the ansatz.

    The defect is U^p - lambda PU + (lambda - lambda1) tau e1 - f(V); the
    cancellation between U^p and f(V) near the peak is evaluated in
    log1p/expm1 form.
    """
    N = p.N
    lam1 = pair.lambda1
    lam = p.lam(lam1)
    tau = p.tau
    bp = BubbleParams(N=N, delta=p.delta)
    pw = bp.p
    w = omega(N)
    U1 = eval_U(bp, 1.0)
    e1 = pair.e1
    q = 2.0 * N / (N + 2.0)

    def defect(r):
        u = eval_U(bp, r)
        c = U1 + tau * e1(r)
        if u > c:
            head = -_power_diff(u, c, pw)  # U^p - V^p for V > 0
        else:  # negative ansatz region: no cancellation, direct form
            head = u**pw + (c - u) ** pw
        return head - lam * (u - U1) + (lam - lam1) * tau * e1(r)

    pts = _log_points(p.delta)
    val = integrate(lambda r: abs(defect(r)) ** q * w * r ** (N - 1), 0.0, 1.0, spec, points=pts)
    return val ** (1.0 / q)


def psi_gradient_check(
    p: AnsatzParams, pair: EigenPair, uni: UniversalIntegrals
) -> tuple[float, float]:
    """Finite-difference s-gradient of the ansatz energy over eps e^(-2/eps).

    Centered differences with one Richardson extrapolation; the ratios
    approach the closed-form gradient of the reduced energy as eps drops.
    """
    if p.N != 4:
        raise ValueError("gradient check is the N = 4 diagnostic")
    scale = p.eps * math.exp(-2.0 / p.eps)
    if scale < 1e-280:
        raise PrecisionLoss(f"eps e^(-2/eps) = {scale!r} below representable range")

    def gap_at(s1, s2):
        q = AnsatzParams(N=4, eps=p.eps, s1=s1, s2=s2)
        return ansatz_energy_gap(q, pair, uni)

    out = []
    for j in range(2):
        coord = (p.s1, p.s2)[j]
        h = 1e-4 * coord

        def deriv(step):
            if j == 0:
                return (gap_at(p.s1 + step, p.s2) - gap_at(p.s1 - step, p.s2)) / (2.0 * step)
            return (gap_at(p.s1, p.s2 + step) - gap_at(p.s1, p.s2 - step)) / (2.0 * step)

        d_h = deriv(h)
        d_h2 = deriv(0.5 * h)
        out.append((4.0 * d_h2 - d_h) / 3.0 / scale)
    return (out[0], out[1])
