"""Ground truth by radial shooting: genuine nodal solutions of the critical
problem on the unit ball, continuation of the two-nodal-region branch
toward the first eigenvalue, and asymptotic fits of the extracted
concentration parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bubble import BubbleParams
from .numerics import (
    NoBracket,
    NonConvergence,
    NonFinite,
    OdeSpec,
    QuadratureSpec,
    StepUnderflow,
    Trajectory,
    integrate,
    solve_ivp,
)
from .radial import RadialFunction, omega
from .spectrum import EigenPair

_R0 = 1e-8


class BlowUp(RuntimeError):
    """Shot escaped to infinity before reaching the boundary."""

    def __init__(self, radius: float, sign: int):
        super().__init__(f"blow-up at r = {radius} with sign {sign}")
        self.radius = radius
        self.sign = sign


class BranchLost(RuntimeError):
    def __init__(self, message: str, points: list):
        super().__init__(message)
        self.points = points


class InsufficientData(ValueError):
    pass


@dataclass
class RadialSolution:
    N: int
    lam: float
    u0: float
    profile: RadialFunction
    node_count: int
    zeros: tuple
    min_value: float
    blown_up: bool = False
    blow_radius: float | None = None
    blow_sign: int = 0
    energy: float | None = None

    @property
    def boundary_value(self) -> float:
        return self.profile(1.0) if not self.blown_up else math.nan


@dataclass
class NodalBranchPoint:
    N: int
    lam: float
    eps: float
    u0: float
    delta_hat: float
    tau_hat: float
    energy: float
    node_count: int
    min_value: float
    d1_hat: float | None = None
    d2_hat: float | None = None
    s1_hat: float | None = None
    q_eps: float | None = None
    solution: RadialSolution | None = field(default=None, repr=False)


def _rhs(N: int, lam: float, p: float, nonlinear: bool):
    if nonlinear:
        # clamp keeps trial evaluations past the escape guard finite; the
        # trajectory beyond the guard is discarded anyway
        def rhs(r, y):
            u, v = y
            uu = u if abs(u) < 1e55 else math.copysign(1e55, u)
            return (v, -(N - 1) / r * v - lam * uu - abs(uu) ** (p - 1.0) * uu)
    else:
        def rhs(r, y):
            u, v = y
            return (v, -(N - 1) / r * v - lam * u)
    return rhs


def shoot(
    N: int,
    lam: float,
    u0: float,
    nonlinear: bool = True,
    rel_tol: float = 1e-10,
    with_energy: bool = False,
    stop_at_first_zero: bool = False,
) -> RadialSolution:
    """Integrate the radial equation from a Taylor start at the origin.

    Blow-up (the step controller driving |u| past the escape guard) is a
    legitimate shooting outcome and is reported on the returned record,
    not raised.
    """
    p = (N + 2.0) / (N - 2.0)
    f0 = lam * u0 + (abs(u0) ** (p - 1.0) * u0 if nonlinear else 0.0)
    y0 = (u0 - f0 * _R0**2 / (2.0 * N), -f0 * _R0 / N)
    cap = 10.0 * abs(u0) + 1e4

    def crossing(r, y):
        return y[0]

    # stopping at the first sign change avoids tracing the thousands of
    # oscillations past the nodal region when only the zero count class
    # matters (large-u0 classification sweeps)
    crossing.terminal = stop_at_first_zero

    def escape(r, y):
        return abs(y[0]) - cap

    escape.terminal = True

    spec = OdeSpec(rel_tol=rel_tol, abs_tol=rel_tol * max(1.0, abs(u0)) * 1e-4, h_init=_R0)
    try:
        traj = solve_ivp(_rhs(N, lam, p, nonlinear), y0, _R0, 1.0, spec, events=[crossing, escape])
        res = traj.raw
        blown = res.status == 1 and len(res.t_events[1]) > 0
    except (StepUnderflow, NonFinite) as exc:
        # the controller died chasing runaway growth: same outcome as the
        # escape guard, reported from the partial trajectory (which can be
        # empty when even the first step fails)
        res = exc.partial
        if res.sol is None or len(res.t) < 2:
            frozen = np.asarray(y0, dtype=float)
            traj = Trajectory(lambda t: np.broadcast_to(frozen[:, None], (2, np.size(t))).squeeze(), _R0, _R0, frozen)
        else:
            traj = Trajectory(res.sol, _R0, float(res.t[-1]), res.y[:, -1])
        blown = True
    zeros = tuple(float(t) for t in res.t_events[0] if t < 1.0 - 1e-13)
    r_end = float(res.t[-1])

    def value(r):
        rr = np.minimum(r, r_end)
        return traj(rr)[0]

    def deriv(r):
        rr = np.minimum(r, r_end)
        return traj(rr)[1]

    grid = np.linspace(_R0, r_end, 20001)
    vals = traj(grid)[0]
    profile = RadialFunction(
        value=value, derivative=deriv, N=N,
        breakpoints=_scales(N, u0) + zeros,
    )
    sol = RadialSolution(
        N=N,
        lam=lam,
        u0=u0,
        profile=profile,
        node_count=len(zeros),
        zeros=zeros,
        min_value=float(np.nanmin(vals)),
        blown_up=blown,
        blow_radius=r_end if blown else None,
        blow_sign=int(np.sign(traj.y1[0])) if blown and np.isfinite(traj.y1[0]) else 0,
    )
    if with_energy and not blown:
        sol.energy = _solution_energy(sol)
    return sol


def _scales(N: int, u0: float) -> tuple:
    """Quadrature breakpoints around the expected concentration scale."""
    if u0 <= 0:
        return ()
    alpha = BubbleParams(N=N, delta=1.0).alpha
    d = (alpha / u0) ** (2.0 / (N - 2.0)) if u0 > alpha else 0.05
    pts, s = [], max(d, 1e-12)
    while s < 0.5:
        pts.append(s)
        s *= 8.0
    return tuple(pts)


def _solution_energy(sol: RadialSolution) -> float:
    N = sol.N
    p1 = 2.0 * N / (N - 2.0)
    w = omega(N)
    u = sol.profile
    spec = QuadratureSpec(rel_tol=1e-9)
    pts = list(u.breakpoints) or None
    grad = integrate(lambda r: u.deriv(r) ** 2 * w * r ** (N - 1), _R0, 1.0, spec, points=pts)
    power = integrate(lambda r: abs(u(r)) ** p1 * w * r ** (N - 1), _R0, 1.0, spec, points=pts)
    mass = integrate(lambda r: u(r) ** 2 * w * r ** (N - 1), _R0, 1.0, spec, points=pts)
    return 0.5 * grad - power / p1 - 0.5 * sol.lam * mass


def _boundary_value(N: int, lam: float, u0: float, rel_tol: float = 1e-10):
    """u(1) and interior zero count; blow-up maps to a signed large value."""
    sol = shoot(N, lam, u0, rel_tol=rel_tol)
    if sol.blown_up:
        return sol.blow_sign * 1e30, sol.node_count
    return sol.profile(1.0), sol.node_count


def find_nodal(
    N: int,
    lam: float,
    nodes: int = 1,
    bracket: tuple[float, float] | None = None,
    scan: tuple[float, float, int] = (1.0, 1e9, 121),
    rel_tol: float = 1e-11,
) -> RadialSolution:
    """Two-nodal-region solution: u(0) > 0, one interior sign change, u(1) = 0.

    The blow-up branch is the largest-u0 sign change of u(1) across which
    the interior zero count drops from 2 to 1 (the second zero exiting
    through the boundary); u(1) is continuous there, so the bracket is
    polished by bisection on its sign.
    """
    if nodes != 1:
        raise ValueError("only the two-nodal-region branch is tracked")
    if bracket is None:
        lo, hi, n = scan
    else:
        lo, hi = bracket
        n = 25
    grid = np.geomspace(lo, hi, n)
    vals = [_boundary_value(N, lam, float(u), rel_tol=rel_tol) for u in grid]
    # a branch point is a sign change of u(1) across which the count of
    # interior zeros trades between 1 and 2 (the second zero crossing the
    # boundary); the one-zero side always has u(1) < 0
    # orientation flips with the dimension: approaching lambda1 from below
    # (N = 5) the second zero leaves through the boundary as u0 grows, so
    # u(1) crosses + to - and the deepest such crossing is the blow-up
    # branch; from above (N = 4, 6) the second zero enters, u(1) crosses
    # - to +, and the first crossing is genuine (larger u0 sits in the
    # integrator's noise floor)
    descending = N == 5
    if descending:
        candidates = [
            i
            for i in range(len(grid) - 1)
            if vals[i][0] > 0 > vals[i + 1][0]
            and vals[i][1] >= 2
            and vals[i + 1][1] <= 1
        ]
    else:
        candidates = [
            i
            for i in range(len(grid) - 1)
            if vals[i][0] < 0 < vals[i + 1][0]
            and vals[i][1] <= 1
            and vals[i + 1][1] >= 2
        ]
    if not candidates:
        raise NoBracket("no nodal crossing of u(1) over the u0 sweep")
    k = candidates[-1] if descending else candidates[0]
    la, lb = math.log(grid[k]), math.log(grid[k + 1])
    va = vals[k][0]
    for _ in range(64):
        lm = 0.5 * (la + lb)
        v, _z = _boundary_value(N, lam, math.exp(lm), rel_tol=rel_tol)
        if (v > 0) == (va > 0):
            la = lm
        else:
            lb = lm
        if lb - la < 5e-15:
            break
    # the one-interior-zero side of the crossing
    u0 = math.exp(la) if va < 0 else math.exp(lb)
    sol = shoot(N, lam, u0, rel_tol=rel_tol, with_energy=True)
    # at convergence the second zero coincides with the Dirichlet zero at
    # r = 1; a crossing hugging the boundary while u(1) is negligible
    # against the negative amplitude is that boundary zero, not a nodal
    # interface
    amp = abs(sol.min_value)
    if abs(sol.profile(1.0)) <= 1e-4 * amp:
        interior = tuple(z for z in sol.zeros if z < 1.0 - 1e-4)
    else:
        interior = sol.zeros
    sol.zeros = interior
    sol.node_count = len(interior)
    if sol.node_count != 1 or sol.blown_up:
        raise NonConvergence(
            f"refined shot has {sol.node_count} interior zeros (blown_up={sol.blown_up})"
        )
    return sol


def extract_point(sol: RadialSolution, pair: EigenPair) -> NodalBranchPoint:
    """Concentration estimators of a branch solution.

    delta from the center height as if the shot were a pure bubble; tau as
    minus the eigenfunction component in L^2.
    """
    N = sol.N
    eps = abs(sol.lam - pair.lambda1)
    alpha = BubbleParams(N=N, delta=1.0).alpha
    delta_hat = (alpha / sol.u0) ** (2.0 / (N - 2.0))
    w = omega(N)
    tau_hat = -integrate(
        lambda r: sol.profile(r) * pair.e1(r) * w * r ** (N - 1),
        _R0, 1.0, QuadratureSpec(rel_tol=1e-10),
        points=list(sol.profile.breakpoints) or None,
    )
    point = NodalBranchPoint(
        N=N, lam=sol.lam, eps=eps, u0=sol.u0,
        delta_hat=delta_hat, tau_hat=tau_hat,
        energy=sol.energy if sol.energy is not None else _solution_energy(sol),
        node_count=sol.node_count, min_value=sol.min_value, solution=sol,
    )
    if N == 5:
        point.d1_hat = tau_hat / eps**0.75
        point.d2_hat = delta_hat / eps**1.5
    elif N == 4:
        point.q_eps = eps * math.log(1.0 / tau_hat) if tau_hat > 0 else None
        base = eps * math.exp(-1.0 / eps)
        point.s1_hat = delta_hat / base if base > 0 else None
    return point


def continue_branch(N: int, eps_grid, pair: EigenPair) -> list[NodalBranchPoint]:
    """Track the nodal branch over a decreasing eps grid with warm-started
    u0 brackets; raises BranchLost (carrying the good points) on failure."""
    if N not in (4, 5, 6):
        raise ValueError("branch continuation supports N in {4, 5, 6}")
    eps_grid = list(eps_grid)
    if any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps grid must be strictly decreasing")
    sign = +1 if N == 4 else -1
    points: list[NodalBranchPoint] = []
    prev: RadialSolution | None = None
    prev_eps: float | None = None
    for eps in eps_grid:
        lam = pair.lambda1 + sign * eps
        bracket = None
        rt = 1e-11
        if prev is not None:
            pred = prev.u0 * _u0_growth(N, prev_eps, eps)
            bracket = (pred / 8.0, pred * 8.0)
            # keep the absolute integration noise (~ rel_tol * u0) below
            # the boundary value at the crossing, which shrinks fast as
            # the branch steepens
            if pred > 1e8:
                rt = 1e-13
            elif pred > 1e7:
                rt = 1e-12
        try:
            try:
                sol = find_nodal(N, lam, bracket=bracket, rel_tol=rt)
            except NoBracket:
                sol = find_nodal(N, lam, rel_tol=rt)  # cold rescan before giving up
        except (NoBracket, NonConvergence) as exc:
            raise BranchLost(f"branch lost at eps = {eps}: {exc}", points) from exc
        points.append(extract_point(sol, pair))
        prev, prev_eps = sol, eps
    return points


def _u0_growth(N: int, eps_old: float, eps_new: float) -> float:
    """Predicted u0 ratio from the concentration scalings."""
    if N == 5:
        return (eps_new / eps_old) ** (-2.25)
    if N == 4:
        d_old = eps_old * math.exp(-1.0 / eps_old)
        d_new = eps_new * math.exp(-1.0 / eps_new)
        return d_old / d_new
    # exploratory N = 6: center height stays bounded near the conjectured
    # lambda-bar, so start from parity
    return (eps_new / eps_old) ** (-1.0)


def fit_asymptotics(branch: list[NodalBranchPoint], N: int) -> dict:
    """Power-law fits of the extracted concentration parameters.

    N = 5: log-log slopes of tau and delta against eps plus the limiting
    ratios at the smallest eps.  N = 4: the log-scale diagnostic
    q(eps) = eps log(1/tau) and the s1 ratio where representable.
    """
    if len(branch) < 4:
        raise InsufficientData("need at least 4 branch points to fit")
    eps = np.array([b.eps for b in branch])
    if N == 5:
        tau = np.array([b.tau_hat for b in branch])
        delta = np.array([b.delta_hat for b in branch])
        slope_tau = np.polyfit(np.log(eps), np.log(tau), 1)[0]
        slope_delta = np.polyfit(np.log(eps), np.log(delta), 1)[0]
        last = branch[-1]
        return {
            "slope_tau": float(slope_tau),
            "slope_delta": float(slope_delta),
            "d1_limit": last.d1_hat,
            "d2_limit": last.d2_hat,
        }
    if N == 4:
        return {
            "q": [b.q_eps for b in branch],
            "s1": [b.s1_hat for b in branch],
            "eps": eps.tolist(),
        }
    raise ValueError("fits defined for N in {4, 5}")


def find_positive(
    N: int,
    lam: float,
    u0_range: tuple[float, float] = (1e-3, 1e6),
    n_scan: int = 181,
) -> RadialSolution | None:
    """Positive radial solution (no interior zero, u(1) = 0), or None.

    Bisects u(1) over consecutive scan points whose shots stay positive;
    used for the low-lambda existence threshold in dimension 3.
    """
    grid = np.geomspace(u0_range[0], u0_range[1], n_scan)

    def h(u0):
        sol = shoot(N, lam, float(u0), rel_tol=1e-9, stop_at_first_zero=True)
        if sol.node_count >= 1 or sol.blown_up:
            return -1.0
        return sol.profile(1.0)

    vals = [h(u) for u in grid]
    for i in range(len(grid) - 1):
        if vals[i] > 0 > vals[i + 1]:
            la, lb = math.log(grid[i]), math.log(grid[i + 1])
            for _ in range(70):
                lm = 0.5 * (la + lb)
                if h(math.exp(lm)) > 0:
                    la = lm
                else:
                    lb = lm
            sol = shoot(N, lam, math.exp(0.5 * (la + lb)), rel_tol=1e-11, with_energy=True)
            if sol.node_count == 0 and abs(sol.profile(1.0)) < 1e-6 * sol.u0:
                return sol
    return None


def explore_n6(eps_grid, pair: EigenPair) -> dict:
    """Exploratory dimension-6 probe: follow the nodal branch and report
    where the negative-part amplitude stops shrinking, together with twice
    the center height of the positive solution there.  No pass/fail is
    attached; the regime is conjectural."""
    try:
        points = continue_branch(6, eps_grid, pair)
    except BranchLost as exc:
        points = exc.points
    amplitudes = [(-b.min_value, b.eps, b.lam) for b in points]
    stall = None
    for (a0, _, _), (a1, e1_, l1_) in zip(amplitudes, amplitudes[1:]):
        if a1 >= a0:
            stall = {"eps": e1_, "lam": l1_, "neg_amplitude": a1}
            break
    out = {
        "points": points,
        "stall": stall,
    }
    if stall is not None:
        pos = find_positive(6, stall["lam"], u0_range=(1e-2, 1e6))
        out["twice_positive_center"] = 2.0 * pos.u0 if pos is not None else None
    return out
