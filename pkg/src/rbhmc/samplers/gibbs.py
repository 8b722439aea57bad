"""Gibbs sampler for the Bayesian NMF posterior.

Every scalar full conditional of the model ``X ~ N(WA, sigma^2)``,
``W, A ~ Exp(lambda)`` is a normal truncated to ``[0, inf)``.  For ``W_ik``
with residual ``R = X - WA + W[:, k] A[k]``::

    precision = sum_j A_kj^2 / sigma^2
    mean      = (sum_j A_kj R_ij / sigma^2 - lambda_W) / precision

and symmetrically for ``A_kj``.  Entries in one column of ``W`` (one row of
``A``) are conditionally independent given everything else, so each column
is drawn as a block; the sweep order is W columns ``k = 0..K-1`` then A rows.
When the precision is zero the likelihood is flat in that entry and the
conditional reduces to the ``Exp(lambda)`` prior.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import InvalidArgument
from ..targets import NmfModel
from .chain import Chain, RngLike, as_rng
from .truncnorm import truncnorm_lower


def _draw(num, sq, s2, lam, rng):
    if sq > 0.0:
        prec = sq / s2
        mean = (num / s2 - lam) / prec
        return truncnorm_lower(mean, 1.0 / np.sqrt(prec), 0.0, rng)
    return rng.exponential(1.0 / lam, size=num.shape)


def gibbs_sweep(model: NmfModel, W: np.ndarray, A: np.ndarray, rng: np.random.Generator):
    """One systematic scan; updates ``W`` and ``A`` in place."""
    X, s2 = model.X, model.sigma**2
    R = X - W @ A
    for k in range(model.K):
        R += np.outer(W[:, k], A[k])
        W[:, k] = _draw(R @ A[k], float(A[k] @ A[k]), s2, model.lambda_W, rng)
        R -= np.outer(W[:, k], A[k])
    for k in range(model.K):
        R += np.outer(W[:, k], A[k])
        A[k] = _draw(W[:, k] @ R, float(W[:, k] @ W[:, k]), s2, model.lambda_A, rng)
        R -= np.outer(W[:, k], A[k])


def gibbs_nmf(
    model: NmfModel,
    n_iters: int,
    rng: RngLike,
    init: Optional[tuple] = None,
    callback=None,
) -> Chain:
    """Run ``n_iters`` sweeps; samples are packed ``(W, A)`` state vectors.

    ``init`` defaults to a draw from the exponential priors.  ``energies``
    records the negative log posterior (up to a constant) after each sweep.
    """
    if n_iters < 1:
        raise InvalidArgument("n_iters must be >= 1")
    if not np.all(np.isfinite(model.X)):
        raise InvalidArgument("observation matrix contains non-finite values")
    gen, seed = as_rng(rng)
    if init is None:
        W = gen.exponential(1.0 / model.lambda_W, size=(model.N, model.K))
        A = gen.exponential(1.0 / model.lambda_A, size=(model.K, model.D))
    else:
        W, A = (np.array(a, dtype=float) for a in model.unpack(model.pack(*init)))
        if (W < 0).any() or (A < 0).any():
            raise InvalidArgument("Gibbs initial factors must be non-negative")
    samples = np.empty((n_iters, model.dim))
    energies = np.empty(n_iters)
    n = n_iters
    for i in range(n_iters):
        gibbs_sweep(model, W, A, gen)
        samples[i] = model.pack(W, A)
        energies[i] = model.smooth_potential(W, A)
        if callback is not None and callback(i, samples[i], True):
            n = i + 1
            break
    return Chain(samples[:n], np.ones(n, dtype=bool), energies[:n], seed, 0, "gibbs")
