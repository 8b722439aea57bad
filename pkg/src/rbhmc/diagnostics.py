"""Error measures and histogram helpers for the experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument


def _as_samples(samples) -> np.ndarray:
    s = np.asarray(samples, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    if s.ndim != 2 or s.shape[0] == 0:
        raise InvalidArgument("need a non-empty (n_samples, dim) array")
    return s


def wmae(samples) -> float:
    """Worst mean absolute error: ``max_d |mean of component d|``."""
    s = _as_samples(samples)
    return float(np.max(np.abs(s.mean(axis=0))))


def cumulative_wmae(samples) -> np.ndarray:
    """WMAE of the first ``k`` samples, for every ``k = 1..n``."""
    s = _as_samples(samples)
    running = np.cumsum(s, axis=0) / np.arange(1, s.shape[0] + 1)[:, None]
    return np.max(np.abs(running), axis=1)


def mean_abs_diff(W, A, X) -> float:
    """``mean |X - WA|`` over all entries."""
    W, A, X = (np.asarray(a, dtype=float) for a in (W, A, X))
    if W.ndim != 2 or A.ndim != 2 or X.ndim != 2 or W.shape[1] != A.shape[0] or X.shape != (W.shape[0], A.shape[1]):
        raise InvalidArgument(f"shapes do not conform: W {W.shape}, A {A.shape}, X {X.shape}")
    return float(np.mean(np.abs(X - W @ A)))


@dataclass(frozen=True)
class Histogram2D:
    x_edges: np.ndarray
    y_edges: np.ndarray
    density: np.ndarray  # shape (len(x_edges) - 1, len(y_edges) - 1)
    overflow: int = 0

    @property
    def areas(self) -> np.ndarray:
        return np.outer(np.diff(self.x_edges), np.diff(self.y_edges))


def _check_edges(edges, name):
    e = np.asarray(edges, dtype=float)
    if e.ndim != 1 or e.size < 2:
        raise InvalidArgument(f"{name} needs at least two edges")
    if not np.all(np.diff(e) > 0):
        raise InvalidArgument(f"{name} must be strictly increasing")
    return e


def histogram2d(samples, x_edges, y_edges) -> Histogram2D:
    """Density-normalised 2D histogram of the in-range samples.

    Samples outside the edge box are dropped from the normalisation and
    tallied in ``overflow``.
    """
    xe = _check_edges(x_edges, "x_edges")
    ye = _check_edges(y_edges, "y_edges")
    s = _as_samples(samples)
    counts, _, _ = np.histogram2d(s[:, 0], s[:, 1], bins=(xe, ye))
    total = counts.sum()
    overflow = int(s.shape[0] - total)
    area = np.outer(np.diff(xe), np.diff(ye))
    density = counts / (total * area) if total > 0 else np.zeros_like(counts)
    return Histogram2D(xe, ye, density, overflow)


def bin_average(density, x_edges, y_edges, sub: int = 4) -> np.ndarray:
    """Average of ``density(x, y)`` over each bin by a ``sub x sub`` midpoint rule.

    ``density`` is called once on arrays ``X, Y`` of the same shape.
    """
    xe, ye = np.asarray(x_edges, dtype=float), np.asarray(y_edges, dtype=float)
    fx = (np.arange(sub) + 0.5) / sub
    xs = (xe[:-1, None] + np.diff(xe)[:, None] * fx).ravel()
    ys = (ye[:-1, None] + np.diff(ye)[:, None] * fx).ravel()
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vals = np.asarray(density(X, Y), dtype=float)
    nx, ny = xe.size - 1, ye.size - 1
    return vals.reshape(nx, sub, ny, sub).mean(axis=(1, 3))


def hist_l1_error(h: Histogram2D, density, sub: int = 4) -> float:
    """``sum |bin-averaged density - histogram density| * bin area``."""
    ref = bin_average(density, h.x_edges, h.y_edges, sub)
    return float(np.sum(np.abs(ref - h.density) * h.areas))
