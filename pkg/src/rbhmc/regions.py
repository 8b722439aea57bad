"""Exact truncation regions with closed-form trajectory crossings.

Each region is callable for membership (vectorised over leading axes) and,
where the geometry allows, exposes ``first_exit(x, v, t_max)`` returning the
earliest time the straight line ``x + t v`` leaves it together with the
outward unit normal there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball ``|x - center| <= radius``."""

    radius: float
    center: Optional[np.ndarray] = None

    def _shift(self, x):
        x = np.asarray(x, dtype=float)
        return x if self.center is None else x - self.center

    def __call__(self, x):
        y = self._shift(x)
        return np.sum(y * y, axis=-1) <= self.radius**2

    def first_exit(self, x, v, t_max):
        """Earliest ``t`` in ``(0, t_max]`` where ``x + t v`` leaves the ball.

        Returns ``(t, outward_unit_normal)`` or ``None``.
        """
        y = self._shift(x)
        a = v @ v
        if a == 0.0:
            return None
        b = y @ v
        c = y @ y - self.radius**2
        disc = max(b * b - a * c, 0.0)
        s = math.sqrt(disc)
        # larger root of a t^2 + 2 b t + c, written to avoid cancellation
        t = (-b + s) / a if b <= 0.0 else -c / (b + s)
        if t > t_max:
            return None
        t = max(t, 0.0)
        hit = y + t * v
        return t, hit / np.linalg.norm(hit)


@dataclass(frozen=True)
class HalfSpace:
    """Closed half-space ``normal . x >= offset``."""

    normal: np.ndarray
    offset: float = 0.0

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.normal >= self.offset

    def first_exit(self, x, v, t_max):
        rate = float(self.normal @ v)
        if rate >= 0.0:
            return None
        slack = float(self.normal @ x) - self.offset
        t = max(slack, 0.0) / -rate
        if t > t_max:
            return None
        n = np.asarray(self.normal, dtype=float)
        return t, -n / np.linalg.norm(n)


@dataclass(frozen=True)
class Intersection:
    regions: tuple

    def __call__(self, x):
        inside = True
        for r in self.regions:
            inside = np.logical_and(inside, r(x))
        return inside

    def first_exit(self, x, v, t_max):
        best = None
        for r in self.regions:
            hit = r.first_exit(x, v, t_max)
            if hit is not None and (best is None or hit[0] < best[0]):
                best = hit
        return best


@dataclass(frozen=True)
class LevelSet:
    """``{x : g(x) > 0}`` for an arbitrary level-set function; membership only."""

    g: Callable[[np.ndarray], float]

    def __call__(self, x):
        return np.asarray(self.g(x)) > 0
