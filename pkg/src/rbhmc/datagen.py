"""Synthetic data for the NMF and norm-potential experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

IMAGE_SIDE = 6
N_BASE = 4


@dataclass(frozen=True)
class NmfDataset:
    X: np.ndarray
    W_true: np.ndarray
    A_true: np.ndarray
    noise_sd: float
    seed: int | None = None


def base_images() -> np.ndarray:
    """Four binary 6x6 images, one per 3x3 corner block, flattened row-major."""
    images = np.zeros((N_BASE, IMAGE_SIDE, IMAGE_SIDE))
    h = IMAGE_SIDE // 2
    corners = [(0, 0), (0, h), (h, 0), (h, h)]
    for img, (r, c) in zip(images, corners):
        img[r:r + h, c:c + h] = 1.0
    return images.reshape(N_BASE, -1)


def gen_nmf_dataset(n: int, noise_sd: float, rng) -> NmfDataset:
    """``X = W_true A_true + noise`` with Bernoulli(1/2) presence indicators in ``W_true``.

    ``rng`` may be an int seed or a numpy Generator.
    """
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    if noise_sd < 0:
        raise InvalidArgument("noise_sd must be non-negative")
    seed = None
    if not isinstance(rng, np.random.Generator):
        seed = int(rng)
        rng = np.random.default_rng(seed)
    A = base_images()
    W = rng.integers(0, 2, size=(n, N_BASE)).astype(float)
    X = W @ A + noise_sd * rng.standard_normal((n, A.shape[1]))
    return NmfDataset(X, W, A, float(noise_sd), seed)


def gen_diag_A(dim: int, rng) -> np.ndarray:
    """Diagonal of ``A``: each entry ``exp(5)`` or ``exp(-5)`` with equal odds."""
    if dim < 1:
        raise InvalidArgument("dim must be >= 1")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(int(rng))
    return np.where(rng.random(dim) < 0.5, np.exp(5.0), np.exp(-5.0))
