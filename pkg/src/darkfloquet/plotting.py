"""Figure rendering for the CLI report path.

Every writer takes a result object and a target path and produces a PNG (or
whatever the path extension selects) next to the delimited output.  Uses the
Agg backend so headless runs never block.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .continuum import BpmResult
from .integrate import Trajectory
from .sweep import SweepResult

__all__ = [
    "save_sweep_figure",
    "save_trajectory_figure",
    "save_power_figure",
]

_PARAM_LABEL = {
    "omega2": r"$\Omega_2$",
    "amplitude_over_omega": r"$A/\omega$",
    "omega": r"$\omega$",
}


def save_sweep_figure(result: SweepResult, path, predictions=None) -> None:
    """Three stacked panels: Min(P1), quasi-energies, dark-mode populations."""
    label = _PARAM_LABEL.get(result.spec.parameter, result.spec.parameter)
    fig, axes = plt.subplots(3, 1, figsize=(6.4, 8.0), sharex=True)

    ax = axes[0]
    ax.plot(result.param, result.min_p1, lw=0.8, color="tab:blue")
    if predictions:
        for pred in predictions:
            ax.axvline(pred.omega2_star, color="0.6", ls="--", lw=0.7)
    ax.set_ylabel(r"Min$(P_1)$")
    ax.set_ylim(-0.02, 1.02)

    ax = axes[1]
    for j in range(result.n_sites):
        ax.plot(result.param, result.quasienergies[:, j], ".", ms=1.2)
    ax.set_ylabel(r"$\varepsilon$")

    ax = axes[2]
    dark = np.where(result.dark_present[:, None], result.dark_populations, np.nan)
    for j in range(result.n_sites):
        ax.plot(result.param, dark[:, j], lw=0.8, label=rf"$\langle P_{j+1}\rangle$")
    ax.set_ylabel(r"dark $\langle P_j\rangle$")
    ax.set_xlabel(label)
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="center right", fontsize=8)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trajectory_figure(traj: Trajectory, path) -> None:
    """Per-guide populations along z."""
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    pops = traj.populations
    for j in range(traj.n_sites):
        ax.plot(traj.z_samples, pops[:, j], lw=0.7, label=rf"$P_{j+1}$")
    ax.set_xlabel("z")
    ax.set_ylabel(r"$P_j$")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_power_figure(result: BpmResult, path) -> None:
    """Per-guide powers along z; adds the intensity map when it was recorded."""
    panels = 2 if result.intensity is not None else 1
    fig, axes = plt.subplots(panels, 1, figsize=(6.4, 3.2 * panels), squeeze=False)

    ax = axes[0][0]
    for j in range(result.config.n_guides):
        ax.plot(result.z, result.guide_fractions[:, j], lw=0.8, label=f"guide {j+1}")
    ax.plot(result.z, result.total_power, "k--", lw=0.6, label="total")
    ax.set_xlabel("z")
    ax.set_ylabel("power fraction")
    ax.legend(fontsize=8)

    if result.intensity is not None:
        ax = axes[1][0]
        x = result.config.grid.x
        ax.imshow(result.intensity.T, origin="lower", aspect="auto",
                  extent=(result.z[0], result.z[-1], x[0], x[-1]),
                  cmap="magma")
        ax.set_xlabel("z")
        ax.set_ylabel("x")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
