"""Target densities expressed as potentials ``U(x) = -log f(x)``.

Normalisation constants are dropped throughout.  A target may carry a
``hard_roi``: the exact truncation region, which the reject-on-exit and
reflective samplers enforce and the roll-back sampler ignores (it relies on a
:class:`~rbhmc.constraints.ConstraintSet` instead).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .constraints import CoordinateBarrier, ConstraintSet, softplus, logistic
from .errors import InvalidArgument
from .regions import Ball, HalfSpace


@dataclass(frozen=True)
class Target:
    dim: int
    potential: Callable[[np.ndarray], float]
    grad_potential: Callable[[np.ndarray], np.ndarray]
    hard_roi: Optional[Callable[[np.ndarray], bool]] = None
    label: str = ""

    def inside(self, x) -> bool:
        return True if self.hard_roi is None else bool(self.hard_roi(x))

    def hard_potential(self, x) -> float:
        """Potential with the exact truncation: ``+inf`` outside ``hard_roi``."""
        if not self.inside(x):
            return math.inf
        return self.potential(x)


def gaussian_std(dim: int) -> Target:
    if dim < 1:
        raise InvalidArgument("dimension must be >= 1")

    def potential(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ x)

    def grad(x):
        return np.array(x, dtype=float)

    return Target(dim, potential, grad, None, f"gaussian{dim}d")


def exponential(rate: float = 1.0) -> Target:
    """1D ``f(x) = exp(-rate x)`` extended smoothly to the whole line.

    Truncation to ``x > 0`` is left to a constraint or to ``hard_roi``.
    """
    if rate <= 0:
        raise InvalidArgument("rate must be positive")

    def potential(x):
        return rate * float(x[0])

    def grad(x):
        return np.array([rate])

    return Target(1, potential, grad, HalfSpace(np.array([1.0]), 0.0), "exponential")


def norm_potential(a_diag, radius: float = 3.0) -> Target:
    """``U(x) = sqrt(x^T A x)`` with diagonal ``A``, truncated to ``|x| <= radius``.

    The callable potential is the smooth extension valid everywhere; the hard
    truncation lives in ``hard_roi``.  The gradient at the origin is taken as 0.
    """
    a = np.asarray(a_diag, dtype=float).ravel()
    if a.size < 1 or not np.all(a > 0):
        raise InvalidArgument("a_diag entries must be positive")
    if radius <= 0:
        raise InvalidArgument("radius must be positive")

    def potential(x):
        x = np.asarray(x, dtype=float)
        return math.sqrt(float(a @ (x * x)))

    def grad(x):
        x = np.asarray(x, dtype=float)
        ax = a * x
        q = float(ax @ x)
        if q <= 0.0:
            return np.zeros_like(x)
        return ax / math.sqrt(q)

    return Target(a.size, potential, grad, Ball(float(radius)), f"norm{a.size}d")


# --- Bayesian NMF ----------------------------------------------------------


@dataclass(frozen=True)
class NmfModel:
    """Gaussian likelihood ``X ~ N(WA, sigma^2)`` with exponential priors on W, A.

    The sampling state is the flat vector ``concat(W.ravel(), A.ravel())``.
    """

    X: np.ndarray
    K: int
    lambda_W: float = 1.0
    lambda_A: float = 1.0
    sigma: float = 0.5
    mu: float = 200.0

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2 or min(X.shape) < 1:
            raise InvalidArgument("X must be a non-empty 2D matrix")
        if self.K < 1:
            raise InvalidArgument("K must be >= 1")
        if not (self.sigma > 0 and self.lambda_W > 0 and self.lambda_A > 0 and self.mu > 0):
            raise InvalidArgument("sigma, lambda_W, lambda_A and mu must be positive")
        object.__setattr__(self, "X", X)

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def D(self) -> int:
        return self.X.shape[1]

    @property
    def dim(self) -> int:
        return self.K * (self.N + self.D)

    def pack(self, W, A) -> np.ndarray:
        W, A = self._check(W, A)
        return np.concatenate([W.ravel(), A.ravel()])

    def unpack(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise InvalidArgument(f"state vector must have length {self.dim}, got {v.shape}")
        nk = self.N * self.K
        return v[:nk].reshape(self.N, self.K), v[nk:].reshape(self.K, self.D)

    def _check(self, W, A):
        W = np.asarray(W, dtype=float)
        A = np.asarray(A, dtype=float)
        if W.shape != (self.N, self.K) or A.shape != (self.K, self.D):
            raise InvalidArgument(
                f"expected W {(self.N, self.K)} and A {(self.K, self.D)}, got {W.shape} and {A.shape}"
            )
        return W, A

    def smooth_potential(self, W, A) -> float:
        """Likelihood plus exponential-prior terms, without the boundary terms."""
        W, A = self._check(W, A)
        R = self.X - W @ A
        return (
            float(np.sum(R * R)) / (2.0 * self.sigma**2)
            + self.lambda_W * float(W.sum())
            + self.lambda_A * float(A.sum())
        )

    def smooth_gradient(self, W, A):
        W, A = self._check(W, A)
        R = self.X - W @ A
        s2 = self.sigma**2
        dW = -(R @ A.T) / s2 + self.lambda_W
        dA = -(W.T @ R) / s2 + self.lambda_A
        return dW, dA

    def target(self) -> Target:
        """Smooth part as a flat-vector target; hard ROI is the non-negative orthant."""

        def potential(v):
            return self.smooth_potential(*self.unpack(v))

        def grad(v):
            dW, dA = self.smooth_gradient(*self.unpack(v))
            return np.concatenate([dW.ravel(), dA.ravel()])

        def roi(v):
            return bool(np.all(np.asarray(v) >= 0))

        return Target(self.dim, potential, grad, roi, "nmf")

    def constraints(self) -> ConstraintSet:
        return ConstraintSet((CoordinateBarrier(self.mu, self.dim),))


def nmf_potential(model: NmfModel, W, A) -> float:
    """Approximate NMF potential: smooth part plus a softplus barrier per entry."""
    W, A = model._check(W, A)
    barrier = float(np.sum(softplus(-model.mu * W)) + np.sum(softplus(-model.mu * A)))
    return model.smooth_potential(W, A) + barrier


def nmf_gradient(model: NmfModel, W, A):
    W, A = model._check(W, A)
    dW, dA = model.smooth_gradient(W, A)
    dW = dW - model.mu * logistic(-model.mu * W)
    dA = dA - model.mu * logistic(-model.mu * A)
    return dW, dA
