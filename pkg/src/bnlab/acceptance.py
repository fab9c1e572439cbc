"""Acceptance criteria: one callable per numbered criterion, a shared
cache so expensive artifacts (eigenpairs, branches) are computed once,
and a table runner used by both the CLI `verify` command and the test
suite.

Criterion 12 is expected to fail its q-trend subclause: the dimension-4
branch is exponentially out of reach of double precision at the epsilon
values where the trend would turn (see the repository notes); the
criterion reports honestly rather than being weakened.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.optimize
import scipy.special

from .bubble import BubbleParams, eval_U, eval_U_deriv
from .constants import (
    coeffs_n4,
    coeffs_n5,
    linear_constants,
    reduction_determinant,
    sobolev_rayleigh,
    universal_integrals,
)
from .numerics import QuadratureSpec
from .reduced_energy import (
    AnsatzParams,
    ansatz_energy_gap,
    critical_points,
    g1,
    psi,
    residual_norm,
)
from .shooting import continue_branch, find_positive
from .spectrum import compute_eigenpair

DEFAULT_SEED = 987143

# empirically resolvable continuation grids; the branch does not exist
# (N=5, eps > ~0.08) or sits beyond double precision (N=4, eps < ~1)
# outside these windows
BRANCH5_GRID = (0.02, 0.015, 0.01, 0.007, 0.005, 0.0035, 0.0025)
BRANCH5_GRID_FAST = (0.02, 0.015, 0.01, 0.007, 0.005, 0.0035)
BRANCH4_GRID = (5.0, 3.0, 2.0, 1.5)


@dataclass
class CriterionResult:
    ident: int
    title: str
    passed: bool
    detail: str
    seconds: float


class Lab:
    """Shared computation cache for a verify run."""

    def __init__(self, fast: bool = False, seed: int = DEFAULT_SEED):
        self.fast = fast
        self.seed = seed
        self._pairs: dict = {}
        self._uni: dict = {}
        self._branch: dict = {}

    def pair(self, N: int):
        if N not in self._pairs:
            self._pairs[N] = compute_eigenpair(N)
        return self._pairs[N]

    def uni(self, N: int):
        if N not in self._uni:
            self._uni[N] = universal_integrals(N)
        return self._uni[N]

    def branch(self, N: int):
        if N not in self._branch:
            if N == 5:
                grid = BRANCH5_GRID_FAST if self.fast else BRANCH5_GRID
            else:
                grid = BRANCH4_GRID
            self._branch[N] = continue_branch(N, list(grid), self.pair(N))
        return self._branch[N]

    def coeffs(self, N: int):
        if N == 4:
            return coeffs_n4(self.pair(4), self.uni(4))
        return coeffs_n5(self.pair(5), self.uni(5))


def _second_deriv(params: BubbleParams, r: float) -> float:
    """Richardson-extrapolated centered difference of the analytic first
    derivative; independent of any closed-form Laplacian."""
    h = 1e-5 * (r + params.delta)

    def d(step):
        return (eval_U_deriv(params, r + step) - eval_U_deriv(params, r - step)) / (2 * step)

    return (4.0 * d(h / 2) - d(h)) / 3.0


def c01_bubble_pde(lab: Lab):
    rng = np.random.default_rng(lab.seed)
    worst = 0.0
    for _ in range(20):
        N = int(rng.integers(3, 7))
        delta = float(rng.uniform(0.05, 2.0))
        r = float(rng.uniform(0.01, 3.0))
        params = BubbleParams(N=N, delta=delta)
        lap = _second_deriv(params, r) + (N - 1) / r * eval_U_deriv(params, r)
        rhs = eval_U(params, r) ** params.p
        worst = max(worst, abs(-lap - rhs) / rhs)
    return worst <= 1e-6, f"max rel residual {worst:.3e} (<= 1e-6)"


def c02_eigenvalues(lab: Lab):
    oracles = {
        3: (math.pi**2, 1e-8),
        4: (float(scipy.special.jn_zeros(1, 1)[0]) ** 2, 1e-7),
        5: (scipy.optimize.brentq(lambda x: math.tan(x) - x, math.pi + 0.01, 1.5 * math.pi - 0.01, xtol=1e-14) ** 2, 1e-7),
    }
    errs = []
    ok = True
    for N, (ref, tol) in oracles.items():
        rel = abs(lab.pair(N).lambda1 - ref) / ref
        ok = ok and rel <= tol
        errs.append(f"N={N}: {rel:.2e}")
    return ok, "rel errors " + ", ".join(errs)


def c03_sobolev(lab: Lab):
    ok = True
    parts = []
    for N in (3, 4, 5):
        uni = lab.uni(N)
        S_quad = uni.int_U_p1 ** (2.0 / N)
        S_ray = sobolev_rayleigh(N)
        rel = abs(S_quad - S_ray) / S_ray
        # (1/2 - 1/(p+1)) I = I/N is an exact rational identity in N
        p1 = 2.0 * N / (N - 2.0)
        lhs = (0.5 - 1.0 / p1) * uni.int_U_p1
        ident = abs(lhs - uni.int_U_p1 / N) / uni.int_U_p1
        ok = ok and rel <= 1e-6 and ident <= 1e-15
        parts.append(f"N={N}: S rel {rel:.1e}, identity {ident:.1e}")
    return ok, "; ".join(parts)


def c04_coefficients(lab: Lab):
    c4, c5 = lab.coeffs(4), lab.coeffs(5)
    ok = abs(c4.b1 - 0.5) <= 1e-12 and abs(c5.a1 - 0.5) <= 1e-12
    # moment identity behind the mixed interaction term:
    # 3 * int_{R^4} (|y|^2 - 1)/(1 + |y|^2)^4 dy = omega_4 / 4
    from .numerics import integrate

    w4 = 2.0 * math.pi**2
    val = 3.0 * w4 * integrate(
        lambda r: r**3 * (r**2 - 1.0) / (1.0 + r**2) ** 4, 0.0, math.inf,
        QuadratureSpec(rel_tol=1e-12, abs_tol=1e-15), points=[1.0, 8.0],
    )
    moment_rel = abs(val - w4 / 4.0) / (w4 / 4.0)
    ok = ok and moment_rel <= 1e-8
    # stability under tolerance halving
    tight = QuadratureSpec(rel_tol=0.5e-13)
    u4t = universal_integrals(4, tight)
    u5t = universal_integrals(5, tight)
    c4t = coeffs_n4(lab.pair(4), u4t)
    c5t = coeffs_n5(lab.pair(5), u5t)
    drift = max(
        abs(c4t.b2 - c4.b2) / c4.b2,
        abs(c4t.b3 - c4.b3) / c4.b3,
        abs(c5t.a2 - c5.a2) / c5.a2,
        abs(c5t.a3 - c5.a3) / c5.a3,
        abs(c5t.a4 - c5.a4) / c5.a4,
    )
    ok = ok and drift <= 1e-8
    return ok, f"b1-1/2={c4.b1 - 0.5:.1e}, a1-1/2={c5.a1 - 0.5:.1e}, moment rel {moment_rel:.1e}, halving drift {drift:.1e}"


def c05_critical_points(lab: Lab):
    c4, c5 = lab.coeffs(4), lab.coeffs(5)
    cp4 = critical_points(4, c4)
    cp5 = critical_points(5, c5)
    # derivative-free per-slot oracles; the joint quadratic form is
    # indefinite here (saddle), so each slot is optimized separately
    s1 = scipy.optimize.minimize_scalar(
        lambda s: -psi(s, 1.0, c4),
        bracket=(0.5 * cp4.coordinates[0], cp4.coordinates[0], 2.0 * cp4.coordinates[0]),
        method="golden", options={"xtol": 1e-12},
    ).x
    s2 = scipy.optimize.minimize_scalar(
        lambda s: psi(cp4.coordinates[0], s, c4),
        bounds=(0.7, 1.3), method="bounded", options={"xatol": 1e-10},
    ).x
    err4 = max(abs(s1 - cp4.coordinates[0]) / cp4.coordinates[0], abs(s2 - 1.0))
    d1 = scipy.optimize.minimize_scalar(
        lambda d: -g1(d, c5), bracket=(0.5 * cp5.coordinates[0], cp5.coordinates[0], 2.0 * cp5.coordinates[0]),
        method="golden", options={"xtol": 1e-12},
    ).x
    from .reduced_energy import g2

    d2 = scipy.optimize.minimize_scalar(
        lambda d: -g2(d1, d, c5), bracket=(0.5 * cp5.coordinates[1], cp5.coordinates[1], 2.0 * cp5.coordinates[1]),
        method="golden", options={"xtol": 1e-12},
    ).x
    err5 = max(abs(d1 - cp5.coordinates[0]) / cp5.coordinates[0], abs(d2 - cp5.coordinates[1]) / cp5.coordinates[1])
    ok = err4 <= 1e-6 and err5 <= 1e-6
    return ok, f"N=4 oracle gap {err4:.1e}, N=5 oracle gap {err5:.1e}"


def c06_energy_expansion(lab: Lab):
    pair, uni = lab.pair(5), lab.uni(5)
    c5 = lab.coeffs(5)
    cp = critical_points(5, c5)
    target = g1(cp.coordinates[0], c5)
    eps_list = (1e-2, 3e-3) if lab.fast else (1e-2, 3e-3, 1e-3, 3e-4)
    rels = []
    for eps in eps_list:
        p = AnsatzParams(N=5, eps=eps, d1=cp.coordinates[0], d2=cp.coordinates[1])
        gap = ansatz_energy_gap(p, pair, uni)
        rels.append(abs(gap / eps**2.5 - target) / abs(target))
    monotone = all(b < a for a, b in zip(rels, rels[1:]))
    final_ok = rels[-1] <= 0.05 or lab.fast
    ok = monotone and final_ok
    return ok, "rel errors " + ", ".join(f"{r:.3f}" for r in rels) + f", target G1={target:.6f}"


def c07_residual_orders(lab: Lab):
    c5 = lab.coeffs(5)
    cp5 = critical_points(5, c5)
    eps5 = (1e-2, 3e-3) if lab.fast else (1e-2, 3e-3, 1e-3, 3e-4)
    r5 = []
    for eps in eps5:
        p = AnsatzParams(N=5, eps=eps, d1=cp5.coordinates[0], d2=cp5.coordinates[1])
        r5.append(residual_norm(p, lab.pair(5)) / eps**1.5)
    var5 = max(r5) / min(r5)
    c4 = lab.coeffs(4)
    cp4 = critical_points(4, c4)
    eps4 = (0.3, 0.2) if lab.fast else (0.3, 0.2, 0.12, 0.08)
    r4 = []
    for eps in eps4:
        p = AnsatzParams(N=4, eps=eps, s1=cp4.coordinates[0], s2=1.0)
        r4.append(residual_norm(p, lab.pair(4)) / (eps * math.exp(-1.0 / eps)))
    var4 = max(r4) / min(r4)
    ok = var5 < 3.0 and var4 < 3.0
    return ok, f"N=5 ratio var x{var5:.2f}, N=4 ratio var x{var4:.2f} (each < 3)"


def c08_low_dim_threshold(lab: Lab):
    lam1 = lab.pair(3).lambda1
    sol = find_positive(3, 0.5 * lam1)
    exists = sol is not None and sol.node_count == 0 and sol.min_value > -1e-6 * sol.u0
    none_found = find_positive(3, 0.15 * lam1) is None
    ok = exists and none_found
    return ok, f"positive solution at lambda1/2: {'yes' if exists else 'no'}; at 0.15 lambda1: {'none' if none_found else 'FOUND'}"


def _fit_tail(branch):
    tail = [b for b in branch if b.eps <= 0.0101]
    eps = np.array([b.eps for b in tail])
    st = float(np.polyfit(np.log(eps), np.log([b.tau_hat for b in tail]), 1)[0])
    sd = float(np.polyfit(np.log(eps), np.log([b.delta_hat for b in tail]), 1)[0])
    return st, sd


def c09_branch_asymptotics(lab: Lab):
    branch = lab.branch(5)
    c5 = lab.coeffs(5)
    cp = critical_points(5, c5)
    st, sd = _fit_tail(branch)
    last = branch[-1]
    e1 = abs(last.d1_hat - cp.coordinates[0]) / cp.coordinates[0]
    e2 = abs(last.d2_hat - cp.coordinates[1]) / cp.coordinates[1]
    ok = abs(st - 0.75) <= 0.05 and abs(sd - 1.5) <= 0.1 and e1 <= 0.2 and e2 <= 0.2
    return ok, f"slopes {st:.3f}/{sd:.3f} (0.75+-0.05, 1.5+-0.1), d-limit errors {e1:.1%}/{e2:.1%} (<=20%)"


def c10_energy_level(lab: Lab):
    branch = lab.branch(5)
    S = sobolev_rayleigh(5)
    ratio = 5.0 * branch[-1].energy / S**2.5
    ok = abs(ratio - 1.0) <= 0.05
    return ok, f"N E / S^(N/2) = {ratio:.6f} (within 5% of 1)"


def c11_profile_separation(lab: Lab):
    branch = lab.branch(5)
    pair = lab.pair(5)
    rr = np.linspace(0.3, 0.9, 241)
    seps = []
    for b in branch[-4:]:
        sep = max(abs(b.solution.profile(r) + b.tau_hat * pair.e1(r)) for r in rr) / b.tau_hat
        seps.append(sep)
    ok = all(b < a for a, b in zip(seps, seps[1:]))
    return ok, "sup|u + tau e1|/tau over last four: " + ", ".join(f"{s:.2e}" for s in seps)


def c12_dim4_trends(lab: Lab):
    branch = lab.branch(4)
    exists = len(branch) == len(BRANCH4_GRID)
    mins = [-b.min_value for b in branch]
    min_dec = all(b < a for a, b in zip(mins, mins[1:]))
    qs = [b.q_eps for b in branch]
    q_dec = all(b < a for a, b in zip(qs, qs[1:])) and qs[-1] > 1.0
    ok = exists and min_dec and q_dec
    detail = (
        f"branch exists: {'yes' if exists else 'no'}; -min u decreasing: {'yes' if min_dec else 'no'}; "
        f"q trend toward 1: {'yes' if q_dec else 'NO (q = ' + ', '.join(f'{q:.2f}' for q in qs) + ' rises as eps drops; the asymptotic turn lies beyond double precision)'}"
    )
    return ok, detail


def c13_nonsingularity(lab: Lab):
    ok = True
    parts = []
    for N in (4, 5):
        d2 = critical_points(5, lab.coeffs(5)).coordinates[1] if N == 5 else None
        consts = linear_constants(N, lab.pair(N), d2=d2)
        floor = 0.1 * consts.A * consts.D0 * lab.pair(N).lambda1
        worst = min(reduction_determinant(consts, float(d)) for d in np.geomspace(1e-6, 1e-2, 25))
        ok = ok and worst >= floor
        parts.append(f"N={N}: min det {worst:.4e} >= {floor:.4e}")
    return ok, "; ".join(parts)


CRITERIA = [
    (1, "Bubble solves the critical equation (20 random samples)", c01_bubble_pde, {3, 4, 5, 6}),
    (2, "First eigenvalues match independent oracles", c02_eigenvalues, {3, 4, 5}),
    (3, "Sobolev constant consistency and energy identity", c03_sobolev, {3, 4, 5}),
    (4, "Coefficient exactness and quadrature stability", c04_coefficients, {4, 5}),
    (5, "Closed-form critical points match derivative-free oracles", c05_critical_points, {4, 5}),
    (6, "Dimension-5 energy expansion converges to G1", c06_energy_expansion, {5}),
    (7, "Residual norms scale at the predicted orders", c07_residual_orders, {4, 5}),
    (8, "Dimension-3 positive-solution threshold", c08_low_dim_threshold, {3}),
    (9, "Dimension-5 branch slopes and concentration limits", c09_branch_asymptotics, {5}),
    (10, "Branch energy approaches the critical level", c10_energy_level, {5}),
    (11, "Profile separation shrinks along the branch", c11_profile_separation, {5}),
    (12, "Dimension-4 branch trend checks", c12_dim4_trends, {4}),
    (13, "Reduction systems stay non-singular", c13_nonsingularity, {4, 5}),
]


def run(dims=None, fast: bool = False, seed: int = DEFAULT_SEED) -> list[CriterionResult]:
    lab = Lab(fast=fast, seed=seed)
    results = []
    for ident, title, fn, dimset in CRITERIA:
        if dims is not None and not (set(dims) & dimset):
            continue
        t0 = time.time()
        try:
            passed, detail = fn(lab)
        except Exception as exc:  # a crashed criterion is a failed criterion
            passed, detail = False, f"error: {type(exc).__name__}: {exc}"
        results.append(CriterionResult(ident, title, bool(passed), detail, time.time() - t0))
    return results


def format_table(results: list[CriterionResult]) -> str:
    lines = []
    width = max(len(r.title) for r in results)
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        lines.append(f"  {r.ident:>2}  {r.title:<{width}}  {mark}  [{r.seconds:6.1f}s]  {r.detail}")
    n_pass = sum(r.passed for r in results)
    lines.append(f"  {n_pass}/{len(results)} criteria passed")
    return "\n".join(lines)
