"""Chain container, sampler configuration and RNG plumbing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ..errors import InvalidArgument
from ..integrator import LeapfrogParams

RngLike = Union[int, np.random.Generator, None]


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, stream)``; streams never overlap."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def as_rng(rng: RngLike):
    """Return ``(generator, seed_record)`` for an int seed or an existing generator."""
    if isinstance(rng, np.random.Generator):
        return rng, None
    if rng is None:
        raise InvalidArgument("a seed or numpy Generator is required")
    return make_rng(int(rng)), int(rng)


def metropolis_accept(delta_h: float, rng: np.random.Generator) -> bool:
    """Accept with probability ``min(1, exp(-delta_h))``.

    One uniform is consumed on every call so that chains stay aligned across
    runs regardless of outcomes.
    """
    u = rng.random()
    if not math.isfinite(delta_h):
        return False
    if delta_h <= 0.0:
        return True
    return u < math.exp(-delta_h)


@dataclass(frozen=True)
class HmcConfig:
    leapfrog: LeapfrogParams
    n_samples: int
    init: np.ndarray
    mass: float = 1.0
    burn_in: int = 0

    def __post_init__(self):
        init = np.array(self.init, dtype=float, ndmin=1)
        if not np.all(np.isfinite(init)):
            raise InvalidArgument("initial position must be finite")
        if self.n_samples < 1:
            raise InvalidArgument("n_samples must be >= 1")
        if not (0 <= self.burn_in < self.n_samples):
            raise InvalidArgument("burn_in must satisfy 0 <= burn_in < n_samples")
        if not self.mass > 0:
            raise InvalidArgument("mass must be positive")
        object.__setattr__(self, "init", init)


@dataclass
class Chain:
    """One Markov chain; row ``i`` of every array belongs to iteration ``i``.

    ``energies`` holds the Hamiltonian of the state retained at that iteration
    (the proposal's when accepted, the starting point's otherwise).
    """

    samples: np.ndarray
    accepted: np.ndarray
    energies: np.ndarray
    seed: Optional[int] = None
    burn_in: int = 0
    sampler: str = ""
    n_diverged: int = 0
    extras: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.samples)

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepted)) if len(self.accepted) else 0.0

    @property
    def kept(self) -> np.ndarray:
        """Samples after burn-in."""
        return self.samples[self.burn_in:]
