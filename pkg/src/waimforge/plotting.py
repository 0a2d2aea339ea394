"""Optional PNG renderings of emitted results (off unless ``--plots``)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_atc_map(result, path, freq_index: int = 0, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    mesh = ax.pcolormesh(result.phis, result.thetas, result.atc[freq_index], vmin=0, vmax=1, shading="nearest")
    ax.contour(result.phis, result.thetas, result.atc[freq_index], levels=[0.9], colors="w", linewidths=1)
    fig.colorbar(mesh, ax=ax, label="ATC")
    ax.set_xlabel("phi [deg]")
    ax.set_ylabel("theta [deg]")
    ax.set_title(title or f"f = {result.freqs[freq_index] / 1e9:g} GHz")
    return _save(fig, path)


def plot_cuts(variants: dict, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, cuts in variants.items():
        style = "-" if label in ("coated", "nominal") else "--"
        for phi, (th, atc, _) in cuts.items():
            ax.plot(th, atc, style, label=f"{label}, phi={phi:g}")
    ax.set_xlabel("theta [deg]")
    ax.set_ylabel("ATC")
    ax.set_ylim(0, 1.02)
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_trace(trace, path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(np.arange(len(trace)), trace.best_cost_normalized)
    ax.set_xlabel("iteration")
    ax.set_ylabel("Psi / Psi_uncoated")
    return _save(fig, path)
