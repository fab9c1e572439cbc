"""Optional figure rendering for the CLI's CSV-producing commands.

Matplotlib is imported lazily so the computational layers never pay for
it; figures are written next to the CSV they illustrate.
"""

from __future__ import annotations

import math


def _mpl():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def branch_figure(rows: list[dict], path: str) -> None:
    """Log-log concentration parameters along a continuation branch."""
    plt = _mpl()
    eps = [r["eps"] for r in rows]
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    axes[0].loglog(eps, [r["delta_hat"] for r in rows], "o-", label="delta_hat")
    axes[0].loglog(eps, [abs(r["tau_hat"]) for r in rows], "s-", label="tau_hat")
    axes[0].set_xlabel("eps")
    axes[0].legend()
    axes[1].semilogx(eps, [-r["min_value"] for r in rows], "o-")
    axes[1].set_xlabel("eps")
    axes[1].set_ylabel("-min u")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def sweep_figure(rows: list[dict], path: str) -> None:
    """Energy gap and residual ratio against eps."""
    plt = _mpl()
    eps = [r["eps"] for r in rows]
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    axes[0].loglog(eps, [abs(r["J"] - r["J_pred"]) for r in rows], "o-")
    axes[0].set_xlabel("eps")
    axes[0].set_ylabel("|J - J_pred|")
    axes[1].semilogx(eps, [r["ratio"] for r in rows], "s-")
    axes[1].set_xlabel("eps")
    axes[1].set_ylabel("residual ratio")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def profile_figure(rr, uu, path: str, title: str = "") -> None:
    """A single radial profile, symlog so both scales of a nodal solution
    stay visible."""
    plt = _mpl()
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.plot(rr, uu)
    top = max(abs(u) for u in uu)
    if top > 0 and top / (1e-12 + min(abs(u) for u in uu if u != 0.0)) > 1e3:
        ax.set_yscale("symlog", linthresh=max(1e-6, 1e-6 * top))
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("r")
    ax.set_ylabel("u(r)")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
