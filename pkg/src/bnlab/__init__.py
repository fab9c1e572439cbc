"""Numerical laboratory for sign-changing blow-up solutions of the
critical semilinear problem -Delta u = lambda u + |u|^{p-1} u on the unit
ball, p = (N+2)/(N-2).

Layers, bottom up: `numerics` (quadrature / ODE / root kernels with
explicit tolerance contracts), `radial` and `bubble` (the explicit entire
solutions and their ball projections), `spectrum` (first Dirichlet
eigenpair by shooting), `constants` (universal integrals and reduction
coefficients), `reduced_energy` (finite-dimensional energy expansions and
ansatz residuals), `shooting` (genuine radial solutions and branch
continuation), `cli` / `acceptance` (front end and the criteria table).
"""

__version__ = "0.1.0"

__all__ = [
    "bubble",
    "constants",
    "numerics",
    "radial",
    "reduced_energy",
    "shooting",
    "spectrum",
]
