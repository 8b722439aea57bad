"""Leapfrog simulation of Hamiltonian dynamics with scalar mass.

Sign convention: ``dx/dt = p / m`` and ``dp/dt = -grad U(x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DivergedTrajectory, InvalidArgument


@dataclass(frozen=True)
class LeapfrogParams:
    step_size: float
    steps: int

    def __post_init__(self):
        if not (self.step_size > 0 and math.isfinite(self.step_size)):
            raise InvalidArgument(f"step size must be positive, got {self.step_size!r}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise InvalidArgument(f"number of leapfrog steps must be a positive integer, got {self.steps!r}")
        object.__setattr__(self, "steps", int(self.steps))


@dataclass(frozen=True)
class PhaseState:
    x: np.ndarray
    p: np.ndarray
    mass: float = 1.0

    def __post_init__(self):
        x = np.array(self.x, dtype=float, ndmin=1)
        p = np.array(self.p, dtype=float, ndmin=1)
        if x.shape != p.shape:
            raise InvalidArgument(f"position {x.shape} and momentum {p.shape} differ in shape")
        if not (self.mass > 0):
            raise InvalidArgument("mass must be positive")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    def kinetic(self) -> float:
        return float(self.p @ self.p) / (2.0 * self.mass)


class LeftRegion(Exception):
    """Raised by :func:`leapfrog` when a drift lands outside the allowed region."""

    def __init__(self, step):
        super().__init__(f"position left the region at leapfrog step {step}")
        self.step = step


def hamiltonian(s: PhaseState, U: Callable[[np.ndarray], float]) -> float:
    """Total energy ``|p|^2 / 2m + U(x)``; a non-finite ``U`` propagates."""
    return s.kinetic() + U(s.x)


def _finite(v) -> bool:
    return bool(np.isfinite(v).all())


def leapfrog(
    s: PhaseState,
    grad_u: Callable[[np.ndarray], np.ndarray],
    params: LeapfrogParams,
    inside: Optional[Callable[[np.ndarray], bool]] = None,
) -> PhaseState:
    """Run ``params.steps`` leapfrog steps from ``s``.

    Half momentum kick, then alternating full drifts and kicks, closing with a
    half kick.  If ``inside`` is given, every drifted position is checked and
    :class:`LeftRegion` is raised on the first one outside.
    """
    eps = params.step_size
    n = params.steps
    m = s.mass
    x = s.x.copy()
    g = grad_u(x)
    p = s.p - 0.5 * eps * g
    for i in range(1, n + 1):
        x = x + (eps / m) * p
        if inside is not None and not inside(x):
            raise LeftRegion(i)
        g = grad_u(x)
        if not (_finite(g) and _finite(x)):
            raise DivergedTrajectory(i)
        p = p - (eps if i < n else 0.5 * eps) * g
    if not _finite(p):
        raise DivergedTrajectory(n)
    return PhaseState(x, p, m)


def leapfrog_path(s: PhaseState, grad_u, params: LeapfrogParams):
    """Like :func:`leapfrog` but returns positions and momenta at every full step.

    Output arrays have shape ``(steps + 1, dim)``; row 0 is the initial state.
    Momenta are the synchronised (post half-kick) values.
    """
    eps = params.step_size
    m = s.mass
    xs = np.empty((params.steps + 1, s.x.size))
    ps = np.empty_like(xs)
    x, p = s.x.copy(), s.p.copy()
    g = grad_u(x)
    xs[0], ps[0] = x, p
    for i in range(1, params.steps + 1):
        p = p - 0.5 * eps * g
        x = x + (eps / m) * p
        g = grad_u(x)
        p = p - 0.5 * eps * g
        if not (_finite(x) and _finite(p)):
            raise DivergedTrajectory(i)
        xs[i], ps[i] = x, p
    return xs, ps


def step_size_bound(mu: float, mass: float, grad_g_sup: float) -> float:
    """Rule-of-thumb ceiling ``sqrt(m) / (|grad g| mu)`` on the leapfrog step.

    Larger steps let the particle jump through the barrier's transition layer
    in one move, which corrupts the roll-back.  Treat as a guideline, not a
    hard limit.
    """
    if not (mu > 0 and mass > 0 and grad_g_sup > 0):
        raise InvalidArgument("mu, mass and grad_g_sup must all be positive")
    return math.sqrt(mass) / (grad_g_sup * mu)
