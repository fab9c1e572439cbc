"""Command-line front end.

Subcommands expose every layer of the library: eigenpairs, constants,
coefficients, critical points, energies, residual norms, parameter
sweeps, single shots, branch continuation, asymptotic fits, and the
acceptance suite (`verify`).

Output is JSON (schema "bnlab/1", every numeric annotated with the
tolerance it was computed under) or CSV, all floats printed with 17
significant digits so runs with identical configuration produce
byte-identical files.  Exit codes: 0 success, 1 computational failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import acceptance
from .constants import (
    coeffs_n4,
    coeffs_n5,
    linear_constants,
    reduction_determinant,
    sobolev_rayleigh,
    universal_integrals,
)
from .numerics import NonConvergence, QuadratureSpec
from .reduced_energy import (
    AnsatzParams,
    ansatz_energy_gap,
    critical_points,
    residual_norm,
)
from .shooting import (
    BlowUp,
    BranchLost,
    InsufficientData,
    NodalBranchPoint,
    continue_branch,
    fit_asymptotics,
    shoot,
)
from .spectrum import compute_eigenpair, e1_functionals, second_eigenvalue

SCHEMA = "bnlab/1"

BRANCH_COLUMNS = (
    "eps", "lambda", "u0", "delta_hat", "tau_hat", "d1_hat", "d2_hat",
    "energy", "node_count", "min_value",
)
SWEEP_COLUMNS = ("eps", "J", "J_pred", "residual", "ratio")


@dataclass
class RunConfig:
    dim: int = 5
    quad_tol: float = 1e-12
    ode_tol: float = 1e-11
    root_tol: float = 1e-11
    eps_grid: list = field(default_factory=list)
    output_format: str = "json"
    output_path: str | None = None
    seed: int = acceptance.DEFAULT_SEED

    def __post_init__(self):
        if self.dim not in (3, 4, 5, 6):
            raise ValueError("dim must be one of 3, 4, 5, 6")
        if any(b >= a for a, b in zip(self.eps_grid, self.eps_grid[1:])) or any(
            e <= 0 for e in self.eps_grid
        ):
            raise ValueError("eps grid must be strictly decreasing and positive")


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _to_json(obj, indent: int = 0) -> str:
    """Deterministic serializer printing floats with 17 significant digits."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for k, v in obj.items():
            items.append(f'{pad}  "{k}": {_to_json(v, indent + 1)}')
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {_to_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return '"' + repr(obj) + '"'
        return _fmt(obj)
    if isinstance(obj, int):
        return str(obj)
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _num(value: float, tol: float) -> dict:
    """A numeric result annotated with the tolerance it was computed under."""
    return {"value": float(value), "tol": float(tol)}


def _emit(doc: dict, cfg: RunConfig) -> None:
    if cfg.output_format == "csv":
        text = _doc_to_csv(doc)
    else:
        text = _to_json({"schema": SCHEMA, **doc}) + "\n"
    if cfg.output_path:
        with open(cfg.output_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _doc_to_csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if "rows" in doc:
        writer.writerow(doc["columns"])
        for row in doc["rows"]:
            writer.writerow([_fmt(v) if v is not None else "" for v in row])
    else:
        writer.writerow(["key", "value", "tol"])
        for key, val in _flatten(doc):
            if isinstance(val, dict) and "value" in val:
                writer.writerow([key, _fmt(val["value"]), _fmt(val["tol"])])
            else:
                writer.writerow([key, _fmt(val), ""])
    return buf.getvalue()


def _flatten(doc: dict, prefix: str = ""):
    for k, v in doc.items():
        name = f"{prefix}{k}"
        if isinstance(v, dict) and "value" not in v:
            yield from _flatten(v, name + ".")
        else:
            yield name, v


def _emit_rows(columns, rows, cfg: RunConfig, extra: dict | None = None):
    if cfg.output_format == "csv":
        _emit({"columns": list(columns), "rows": rows}, cfg)
    else:
        doc = {"columns": list(columns), "rows": [list(r) for r in rows]}
        if extra:
            doc.update(extra)
        _emit(doc, cfg)


def _thread_cap() -> int:
    raw = os.environ.get("BNLAB_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# subcommand implementations; each takes the parsed namespace and the
# resolved RunConfig and returns a process exit code


def cmd_eig(args, cfg: RunConfig) -> int:
    pair = compute_eigenpair(cfg.dim, tol=cfg.root_tol)
    fns = e1_functionals(pair)
    doc = {
        "command": "eig",
        "dim": cfg.dim,
        "lambda1": _num(pair.lambda1, cfg.root_tol),
        "lambda2": _num(second_eigenvalue(cfg.dim, pair.lambda1), cfg.root_tol),
        "e1_at_0": _num(fns["e1_at_0"], cfg.quad_tol),
        "int_e1_sq": _num(fns["int_e1_sq"], cfg.quad_tol),
        "int_e1_p1": _num(fns["int_e1_p1"], cfg.quad_tol),
    }
    _emit(doc, cfg)
    return 0


def cmd_constants(args, cfg: RunConfig) -> int:
    spec = QuadratureSpec(rel_tol=cfg.quad_tol)
    uni = universal_integrals(cfg.dim, spec)
    doc = {
        "command": "constants",
        "dim": cfg.dim,
        "int_U_p": _num(uni.int_U_p, cfg.quad_tol),
        "int_U_p1": _num(uni.int_U_p1, cfg.quad_tol),
        "sobolev_S": _num(uni.sobolev_S, cfg.quad_tol),
        "sobolev_S_rayleigh": _num(sobolev_rayleigh(cfg.dim, spec), cfg.quad_tol),
    }
    if uni.int_U_sq is not None:
        doc["int_U_sq"] = _num(uni.int_U_sq, cfg.quad_tol)
    if cfg.dim in (4, 5):
        pair = compute_eigenpair(cfg.dim, tol=cfg.root_tol)
        d2 = None
        if cfg.dim == 5:
            c5 = coeffs_n5(pair, uni)
            d2 = critical_points(5, c5).coordinates[1]
        lc = linear_constants(cfg.dim, pair, d2=d2, spec=spec)
        doc["linear"] = {
            "A": _num(lc.A, cfg.quad_tol),
            "A0": _num(lc.A0, cfg.quad_tol),
            "B": _num(lc.B, cfg.quad_tol),
            "B0": _num(lc.B0, cfg.quad_tol),
            "D0": _num(lc.D0, cfg.root_tol),
        }
        if lc.C0 is not None:
            doc["linear"]["C0"] = _num(lc.C0, cfg.quad_tol)
        doc["min_reduction_det"] = _num(
            min(reduction_determinant(lc, d) for d in (1e-6, 1e-4, 1e-2)), cfg.quad_tol
        )
    _emit(doc, cfg)
    return 0


def _coeffs(cfg: RunConfig):
    spec = QuadratureSpec(rel_tol=cfg.quad_tol)
    pair = compute_eigenpair(cfg.dim, tol=cfg.root_tol)
    uni = universal_integrals(cfg.dim, spec)
    if cfg.dim == 4:
        return pair, coeffs_n4(pair, uni)
    return pair, coeffs_n5(pair, uni)


def cmd_coeffs(args, cfg: RunConfig) -> int:
    if cfg.dim not in (4, 5):
        raise NonConvergence("reduced-energy coefficients are defined for dim 4 and 5")
    _, c = _coeffs(cfg)
    doc = {"command": "coeffs", "dim": cfg.dim}
    names = ("b1", "b2", "b3") if cfg.dim == 4 else ("a1", "a2", "a3", "a4")
    for name in names:
        doc[name] = _num(getattr(c, name), cfg.quad_tol)
    _emit(doc, cfg)
    return 0


def cmd_critical(args, cfg: RunConfig) -> int:
    if cfg.dim not in (4, 5):
        raise NonConvergence("critical points are defined for dim 4 and 5")
    _, c = _coeffs(cfg)
    cp = critical_points(cfg.dim, c)
    names = ("s1", "s2") if cfg.dim == 4 else ("d1", "d2")
    doc = {
        "command": "critical",
        "dim": cfg.dim,
        names[0]: _num(cp.coordinates[0], cfg.quad_tol),
        names[1]: _num(cp.coordinates[1], cfg.quad_tol),
        "classification": cp.classification,
        "hessian_det": _num(cp.hessian_det, cfg.quad_tol),
        "hessian_trace": _num(cp.hessian_trace, cfg.quad_tol),
    }
    _emit(doc, cfg)
    return 0


def _ansatz_params(cfg: RunConfig, eps: float) -> AnsatzParams:
    _, c = _coeffs(cfg)
    cp = critical_points(cfg.dim, c)
    if cfg.dim == 4:
        return AnsatzParams(N=4, eps=eps, s1=cp.coordinates[0], s2=1.0)
    return AnsatzParams(N=5, eps=eps, d1=cp.coordinates[0], d2=cp.coordinates[1])


def _sweep_row(cfg: RunConfig, eps: float):
    spec = QuadratureSpec(rel_tol=cfg.quad_tol)
    pair = compute_eigenpair(cfg.dim, tol=cfg.root_tol)
    uni = universal_integrals(cfg.dim, QuadratureSpec(rel_tol=cfg.quad_tol))
    _, c = _coeffs(cfg)
    cp = critical_points(cfg.dim, c)
    p = _ansatz_params(cfg, eps)
    gap = ansatz_energy_gap(p, pair, uni)
    level = uni.sobolev_S ** (cfg.dim / 2.0) / cfg.dim
    if cfg.dim == 5:
        from .reduced_energy import g1

        pred_gap = eps**2.5 * g1(cp.coordinates[0], c)
        scale = eps**1.5
    else:
        from .reduced_energy import psi

        pred_gap = eps * math.exp(-2.0 / eps) * psi(cp.coordinates[0], 1.0, c)
        scale = eps * math.exp(-1.0 / eps)
    res = residual_norm(p, pair, spec=QuadratureSpec(rel_tol=max(cfg.quad_tol, 1e-11)))
    return (eps, level + gap, level + pred_gap, res, res / scale)


def cmd_energy(args, cfg: RunConfig) -> int:
    if cfg.dim not in (4, 5):
        raise NonConvergence("ansatz energies are defined for dim 4 and 5")
    eps = args.eps
    pair = compute_eigenpair(cfg.dim, tol=cfg.root_tol)
    uni = universal_integrals(cfg.dim, QuadratureSpec(rel_tol=cfg.quad_tol))
    p = _ansatz_params(cfg, eps)
    gap = ansatz_energy_gap(p, pair, uni)
    level = uni.sobolev_S ** (cfg.dim / 2.0) / cfg.dim
    doc = {
        "command": "energy",
        "dim": cfg.dim,
        "eps": _num(eps, 0.0),
        "critical_level": _num(level, cfg.quad_tol),
        "energy_gap": _num(gap, cfg.quad_tol),
        "energy": _num(level + gap, cfg.quad_tol),
    }
    _emit(doc, cfg)
    return 0


def cmd_residual(args, cfg: RunConfig) -> int:
    if cfg.dim not in (4, 5):
        raise NonConvergence("residual norms are defined for dim 4 and 5")
    eps = args.eps
    pair = compute_eigenpair(cfg.dim, tol=cfg.root_tol)
    p = _ansatz_params(cfg, eps)
    res = residual_norm(p, pair, spec=QuadratureSpec(rel_tol=max(cfg.quad_tol, 1e-11)))
    scale = eps**1.5 if cfg.dim == 5 else eps * math.exp(-1.0 / eps)
    doc = {
        "command": "residual",
        "dim": cfg.dim,
        "eps": _num(eps, 0.0),
        "residual_norm": _num(res, cfg.quad_tol),
        "scaled_ratio": _num(res / scale, cfg.quad_tol),
    }
    _emit(doc, cfg)
    return 0


def cmd_sweep(args, cfg: RunConfig) -> int:
    if cfg.dim not in (4, 5):
        raise NonConvergence("sweeps are defined for dim 4 and 5")
    grid = cfg.eps_grid or ([1e-2, 3e-3, 1e-3, 3e-4] if cfg.dim == 5 else [0.3, 0.2, 0.12, 0.08])
    # independent eps points; gather in grid order so output stays deterministic
    with ThreadPoolExecutor(max_workers=_thread_cap()) as pool:
        rows = list(pool.map(lambda e: _sweep_row(cfg, e), grid))
    _emit_rows(SWEEP_COLUMNS, rows, cfg)
    if getattr(args, "plot", None):
        from .plots import sweep_figure

        sweep_figure([dict(zip(SWEEP_COLUMNS, r)) for r in rows], args.plot)
    return 0


def cmd_shoot(args, cfg: RunConfig) -> int:
    sol = shoot(cfg.dim, args.lam, args.u0, rel_tol=cfg.ode_tol, with_energy=True)
    doc = {
        "command": "shoot",
        "dim": cfg.dim,
        "lambda": _num(args.lam, 0.0),
        "u0": _num(args.u0, 0.0),
        "boundary_value": _num(sol.profile(1.0), cfg.ode_tol),
        "node_count": sol.node_count,
        "zeros": [_num(z, cfg.ode_tol) for z in sol.zeros],
        "min_value": _num(sol.min_value, cfg.ode_tol),
        "blown_up": sol.blown_up,
    }
    if sol.energy is not None:
        doc["energy"] = _num(sol.energy, cfg.quad_tol)
    _emit(doc, cfg)
    return 0


def _branch_rows(branch: list[NodalBranchPoint]):
    return [
        (
            b.eps, b.lam, b.u0, b.delta_hat, b.tau_hat, b.d1_hat, b.d2_hat,
            b.energy, b.node_count, b.min_value,
        )
        for b in branch
    ]


def cmd_branch(args, cfg: RunConfig) -> int:
    if cfg.dim not in (4, 5, 6):
        raise NonConvergence("branch continuation supports dim 4, 5 and 6")
    grid = cfg.eps_grid or (
        list(acceptance.BRANCH5_GRID) if cfg.dim == 5 else list(acceptance.BRANCH4_GRID)
    )
    pair = compute_eigenpair(cfg.dim, tol=cfg.root_tol)
    branch = continue_branch(cfg.dim, grid, pair)
    rows = _branch_rows(branch)
    _emit_rows(BRANCH_COLUMNS, rows, cfg)
    if getattr(args, "plot", None):
        from .plots import branch_figure

        branch_figure([dict(zip(BRANCH_COLUMNS, r)) for r in rows], args.plot)
    return 0


def cmd_fit(args, cfg: RunConfig) -> int:
    with open(args.infile, newline="") as fh:
        reader = csv.DictReader(fh)
        points = []
        for row in reader:
            points.append(
                NodalBranchPoint(
                    N=cfg.dim,
                    lam=float(row["lambda"]),
                    eps=float(row["eps"]),
                    u0=float(row["u0"]),
                    delta_hat=float(row["delta_hat"]),
                    tau_hat=float(row["tau_hat"]),
                    energy=float(row["energy"]),
                    node_count=int(row["node_count"]),
                    min_value=float(row["min_value"]),
                    d1_hat=float(row["d1_hat"]) if row.get("d1_hat") else None,
                    d2_hat=float(row["d2_hat"]) if row.get("d2_hat") else None,
                )
            )
    for p in points:
        if cfg.dim == 4 and p.tau_hat > 0:
            p.q_eps = p.eps * math.log(1.0 / p.tau_hat)
            base = p.eps * math.exp(-1.0 / p.eps)
            p.s1_hat = p.delta_hat / base if base > 0 else None
    fits = fit_asymptotics(points, cfg.dim)
    doc = {"command": "fit", "dim": cfg.dim, "n_points": len(points)}
    for key, val in fits.items():
        if isinstance(val, list):
            doc[key] = [None if v is None else float(v) for v in val]
        elif val is None:
            doc[key] = None
        else:
            doc[key] = _num(float(val), cfg.root_tol)
    _emit(doc, cfg)
    return 0


def cmd_verify(args, cfg: RunConfig) -> int:
    dims = [cfg.dim] if args.dim_given else None
    results = acceptance.run(dims=dims, fast=args.fast, seed=cfg.seed)
    table = acceptance.format_table(results)
    print(table)
    if cfg.output_path:
        doc = {
            "command": "verify",
            "fast": args.fast,
            "criteria": [
                {
                    "id": r.ident,
                    "title": r.title,
                    "passed": r.passed,
                    "detail": r.detail,
                    "seconds": r.seconds,
                }
                for r in results
            ],
        }
        with open(cfg.output_path, "w") as fh:
            fh.write(_to_json({"schema": SCHEMA, **doc}) + "\n")
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "eig": cmd_eig,
    "constants": cmd_constants,
    "coeffs": cmd_coeffs,
    "critical": cmd_critical,
    "energy": cmd_energy,
    "residual": cmd_residual,
    "sweep": cmd_sweep,
    "shoot": cmd_shoot,
    "branch": cmd_branch,
    "fit": cmd_fit,
    "verify": cmd_verify,
}


def _read_config_file(path: str) -> dict:
    values: dict = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _parse_eps_grid(raw: str) -> list:
    return [float(tok) for tok in raw.replace(" ", "").split(",") if tok]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bnlab",
        description="Radial shooting and reduced-energy laboratory on the unit ball.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--dim", type=int, default=None, help="space dimension (3, 4, 5 or 6)")
        p.add_argument("--output", choices=("json", "csv"), default=None, help="output format")
        p.add_argument("--out", default=None, help="output file path (default stdout)")
        p.add_argument("--config", default=None, help="key=value config file; flags take precedence")
        p.add_argument("--quad-tol", type=float, default=None, help="quadrature relative tolerance")
        p.add_argument("--ode-tol", type=float, default=None, help="ODE relative tolerance")
        p.add_argument("--root-tol", type=float, default=None, help="root-finding relative tolerance")
        p.add_argument("--seed", type=int, default=None, help="seed for randomized checks")
        p.add_argument("--eps-grid", default=None, help="comma-separated decreasing eps values")

    for name in ("eig", "constants", "coeffs", "critical"):
        common(sub.add_parser(name))
    p_energy = sub.add_parser("energy")
    common(p_energy)
    p_energy.add_argument("--eps", type=float, required=True)
    p_residual = sub.add_parser("residual")
    common(p_residual)
    p_residual.add_argument("--eps", type=float, required=True)
    p_sweep = sub.add_parser("sweep")
    common(p_sweep)
    p_sweep.add_argument("--plot", default=None, help="also render a figure to this PNG path")
    p_shoot = sub.add_parser("shoot")
    common(p_shoot)
    p_shoot.add_argument("--lambda", dest="lam", type=float, required=True, help="linear coefficient lambda")
    p_shoot.add_argument("--u0", type=float, required=True, help="center height")
    p_branch = sub.add_parser("branch")
    common(p_branch)
    p_branch.add_argument("--plot", default=None, help="also render a figure to this PNG path")
    p_fit = sub.add_parser("fit")
    common(p_fit)
    p_fit.add_argument("--in", dest="infile", required=True, help="branch CSV to fit")
    p_verify = sub.add_parser("verify")
    common(p_verify)
    p_verify.add_argument("--fast", action="store_true", help="trimmed grids, same semantics")
    return parser


_DEFAULTS = RunConfig()


def _resolve_config(args) -> RunConfig:
    file_vals = _read_config_file(args.config) if args.config else {}

    def pick(flag_val, key, cast, default):
        if flag_val is not None:
            return flag_val
        if key in file_vals:
            return cast(file_vals[key])
        return default

    cfg = RunConfig(
        dim=pick(args.dim, "dim", int, _DEFAULTS.dim),
        quad_tol=pick(args.quad_tol, "quad_tol", float, _DEFAULTS.quad_tol),
        ode_tol=pick(args.ode_tol, "ode_tol", float, _DEFAULTS.ode_tol),
        root_tol=pick(args.root_tol, "root_tol", float, _DEFAULTS.root_tol),
        eps_grid=pick(
            _parse_eps_grid(args.eps_grid) if args.eps_grid else None,
            "eps_grid", _parse_eps_grid, [],
        ),
        output_format=pick(args.output, "output", str, _DEFAULTS.output_format),
        output_path=pick(args.out, "out", str, _DEFAULTS.output_path),
        seed=pick(args.seed, "seed", int, _DEFAULTS.seed),
    )
    return cfg


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
    except (ValueError, OSError) as exc:
        parser.exit(2, f"bnlab: configuration error: {exc}\n")
    args.dim_given = args.dim is not None or (
        args.config and "dim" in _read_config_file(args.config)
    )
    try:
        return COMMANDS[args.command](args, cfg)
    except (NonConvergence, BlowUp, BranchLost, InsufficientData, ArithmeticError, ValueError) as exc:
        print(f"bnlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"bnlab: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
