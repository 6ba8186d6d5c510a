"""Figure rendering for the CLI report path.

Each function writes one PNG next to the CSV it illustrates and returns
the path.  The Agg backend is forced so runs work headless.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.0,
    "figure.figsize": (5.0, 3.2),
    "savefig.dpi": 150,
}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    # drop the Software tag so identical inputs give identical files
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_patterns(theta_deg, curves: dict[str, np.ndarray], path) -> Path:
    """Gain in dB vs angle, one curve per frequency label."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, gain_db in curves.items():
            ax.plot(theta_deg, gain_db, label=label)
        ax.set_xlabel("angle (deg)")
        ax.set_ylabel("normalized gain (dB)")
        ax.set_ylim(-80, 3)
        ax.legend(loc="upper right")
        return _save(fig, Path(path))


def plot_blindmap(theta_deg, gamma, q: int, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.fill_between(theta_deg, gamma, step="mid", alpha=0.4)
        ax.step(theta_deg, gamma, where="mid")
        ax.set_xlabel("Eve angle (deg)")
        ax.set_ylabel("blind subchannels")
        ax.set_ylim(0, q + 0.5)
        return _save(fig, Path(path))


def plot_sweep(values, fractions, xlabel: str, path, scale: float = 1.0) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(np.asarray(values) / scale, fractions, marker="o", markersize=3)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("blind fraction")
        ax.set_ylim(0, 1)
        return _save(fig, Path(path))


def plot_rate(values, rates, path, scale: float = 1e9) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(np.asarray(values) / scale, np.asarray(rates) / 1e9, marker="o", markersize=3)
        ax.set_xlabel("bandwidth (GHz)")
        ax.set_ylabel("total rate (Gb/s)")
        return _save(fig, Path(path))


def plot_ber(theta_deg, ber, labels, intervals, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for col, label in zip(np.asarray(ber).T, labels):
            ax.semilogy(theta_deg, col, label=label)
        for start, end in intervals:
            ax.axvspan(start, end, color="tab:orange", alpha=0.25, lw=0)
        ax.set_xlabel("angle (deg)")
        ax.set_ylabel("BER")
        ax.set_ylim(1e-12, 1)
        ax.legend(loc="lower right")
        return _save(fig, Path(path))
