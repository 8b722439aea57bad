"""Vectorised draws from normals truncated below."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr, ndtri

# standardised lower bound above which inverse-CDF loses precision
TAIL_SWITCH = 4.0


def _tail(alpha, rng):
    # Exponential proposal with the optimal rate (Robert, 1995); standardised draws z >= alpha.
    lam = 0.5 * (alpha + np.sqrt(alpha * alpha + 4.0))
    out = np.empty_like(alpha)
    todo = np.arange(alpha.size)
    while todo.size:
        a, l = alpha[todo], lam[todo]
        z = a - np.log(rng.random(todo.size)) / l
        ok = rng.random(todo.size) <= np.exp(-0.5 * (z - l) ** 2)
        out[todo[ok]] = z[ok]
        todo = todo[~ok]
    return out


def truncnorm_lower(mean, sd, lower, rng: np.random.Generator) -> np.ndarray:
    """Sample ``N(mean, sd^2)`` conditioned on ``>= lower``, elementwise.

    Inverse-CDF on the upper tail mass when the standardised bound is at most
    4; exponential rejection beyond that.
    """
    mean, sd, lower = np.broadcast_arrays(
        np.asarray(mean, dtype=float), np.asarray(sd, dtype=float), np.asarray(lower, dtype=float)
    )
    alpha = ((lower - mean) / sd).ravel()
    z = np.empty_like(alpha)
    central = alpha <= TAIL_SWITCH
    if central.any():
        a = alpha[central]
        # Phi(-z) uniform on (0, Phi(-a))  =>  z >= a
        q = ndtr(-a)
        u = rng.random(a.size)
        zc = -ndtri(u * q)
        # u == 0 maps to +inf; rounding can put zc a hair below a
        z[central] = np.where(np.isfinite(zc), np.maximum(zc, a), a)
    if (~central).any():
        z[~central] = _tail(alpha[~central], rng)
    return (mean.ravel() + sd.ravel() * z).reshape(mean.shape)
