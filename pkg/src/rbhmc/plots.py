"""Optional SVG figures for experiment reports (needs matplotlib)."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "rbhmc"
    return plt


def histogram_svg(hist, reference, path) -> Path:
    plt = _plt()
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.6), sharey=True)
    extent = (hist.x_edges[0], hist.x_edges[-1], hist.y_edges[0], hist.y_edges[-1])
    vmax = max(hist.density.max(), reference.max())
    for ax, data, title in zip(axes, (hist.density, reference), ("samples", "density")):
        im = ax.imshow(data.T, origin="lower", extent=extent, vmin=0, vmax=vmax, cmap="viridis")
        ax.set_title(title)
    fig.colorbar(im, ax=axes, shrink=0.8)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return Path(path)


def traces_svg(traces: dict, path, ylabel: str, x=None, xlabel="iteration", logx=False) -> Path:
    """One line per sampler: mean over rounds, shaded between min and max."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for name, runs in traces.items():
        n = min(len(r) for r in runs)
        M = np.vstack([r[:n] for r in runs])
        xs = np.arange(1, n + 1) if x is None else np.mean(np.vstack([t[:n] for t in x[name]]), axis=0)
        ax.plot(xs, M.mean(axis=0), label=name)
        ax.fill_between(xs, M.min(axis=0), M.max(axis=0), alpha=0.2)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return Path(path)


def plot_report(report, out) -> list:
    out = Path(out)
    if report.name == "truncated-gaussian":
        return [histogram_svg(report.traces["histogram"], report.traces["reference"], out / "histogram.svg")]
    if report.name == "wmae":
        w = report.traces["wmae"]
        return [
            traces_svg(w, out / "wmae_iter.svg", "WMAE"),
            traces_svg(w, out / "wmae_time.svg", "WMAE", x=report.timings, xlabel="seconds", logx=True),
        ]
    if report.name == "nmf":
        return [traces_svg(report.traces["diff"], out / "diff.svg", "mean |X - WA|")]
    return []
