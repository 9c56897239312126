"""Figure rendering for runs and sweeps.

Rendered with the Agg backend straight to files; nothing here opens a
window. These are working plots for eyeballing a run, not publication
figures.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_timeseries(trajectory, series, path: str | Path) -> Path:
    """Three panels: late-time mechanical means, S_q(t), E_D(t)."""
    path = Path(path)
    t = trajectory.times
    fig, axes = plt.subplots(3, 1, figsize=(7.0, 8.0), sharex=False)

    # zoom the means onto the final stretch where the limit cycle lives
    tail = t >= t[-1] - 50.0
    axes[0].plot(t[tail], trajectory.means[tail, 0], label=r"$\bar q_1$", lw=0.9)
    axes[0].plot(t[tail], trajectory.means[tail, 4], label=r"$\bar q_2$", lw=0.9, ls="--")
    axes[0].set_ylabel("mechanical means")
    axes[0].legend(loc="upper right", fontsize=8)

    axes[1].plot(t, series.s_q, lw=0.8, color="tab:blue")
    axes[1].set_ylabel(r"$S_q$")
    axes[1].set_ylim(0.0, 1.05)

    axes[2].plot(t, series.e_d, lw=0.8, color="tab:red")
    axes[2].axhline(0.25, color="k", lw=0.8, ls=":")
    axes[2].set_yscale("log")
    axes[2].set_ylabel(r"$E_D$")
    axes[2].set_xlabel("t")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_sweep(sr, path: str | Path) -> Path:
    """Windowed averages against the sweep axis, with the separability
    boundary marked."""
    path = Path(path)
    x = np.asarray(sr.axis_values)
    sq = np.array([r.sq_bar for r in sr.rows])
    ed = np.array([r.ed_bar for r in sr.rows])

    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.plot(x, sq, "o-", ms=3.5, color="tab:blue", label=r"$\bar S_q$")
    ax.set_xlabel(sr.axis_name)
    ax.set_ylabel(r"$\bar S_q$", color="tab:blue")
    ax.set_ylim(0.0, 1.05)

    twin = ax.twinx()
    twin.plot(x, ed, "s-", ms=3.5, color="tab:red", label=r"$\bar E_D$")
    twin.axhline(0.25, color="k", lw=0.8, ls=":")
    twin.set_yscale("log")
    twin.set_ylabel(r"$\bar E_D$", color="tab:red")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
