"""Hamiltonian Monte Carlo variants for truncated targets.

* :func:`rbhmc` runs plain HMC on the target potential plus the smooth
  boundary energies of a :class:`~rbhmc.constraints.ConstraintSet`.  The
  particle bounces off the steep barrier by itself; nothing checks the ROI.
* :func:`baseline_hmc` enforces the exact ROI by abandoning (and rejecting)
  any trajectory that steps outside it.
* :func:`rhmc` enforces the exact ROI by reflecting the momentum off the
  boundary at the analytically computed crossing point.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from ..constraints import ConstraintSet
from ..errors import DivergedTrajectory, InvalidArgument, UnsupportedGeometry
from ..integrator import LeftRegion, PhaseState, leapfrog
from ..regions import Ball, HalfSpace, Intersection
from ..targets import Target
from .chain import Chain, HmcConfig, RngLike, as_rng, metropolis_accept

MAX_DELTA_H = 1000.0
MAX_REFLECTIONS = 32

# callback(iteration, position, accepted) -> truthy to stop the chain early
Callback = Optional[Callable[[int, np.ndarray, bool], object]]


class _Rejected(Exception):
    """Internal: the trajectory was abandoned without a Metropolis test."""


def _run(step, u0: float, cfg: HmcConfig, rng: RngLike, name: str, callback: Callback) -> Chain:
    gen, seed = as_rng(rng)
    n, d = cfg.n_samples, cfg.init.size
    m = cfg.mass
    samples = np.empty((n, d))
    accepted = np.zeros(n, dtype=bool)
    energies = np.empty(n)
    x, u = cfg.init.copy(), u0
    diverged = 0
    sd = math.sqrt(m)
    for i in range(n):
        p = gen.standard_normal(d) * sd
        h0 = float(p @ p) / (2.0 * m) + u
        try:
            x_new, u_new, h1 = step(PhaseState(x, p, m))
            dh = h1 - h0
            if not math.isfinite(dh) or dh > MAX_DELTA_H:
                raise DivergedTrajectory(cfg.leapfrog.steps, "energy error too large")
        except DivergedTrajectory:
            diverged += 1
            dh = math.inf
        except _Rejected:
            dh = math.inf
        acc = metropolis_accept(dh, gen)
        if acc:
            x, u = x_new, u_new
            energies[i] = h1
        else:
            energies[i] = h0
        samples[i] = x
        accepted[i] = acc
        if callback is not None and callback(i, x, acc):
            n = i + 1
            samples, accepted, energies = samples[:n], accepted[:n], energies[:n]
            break
    return Chain(samples, accepted, energies, seed, cfg.burn_in, name, diverged)


def _check_dim(target: Target, cfg: HmcConfig):
    if cfg.init.size != target.dim:
        raise InvalidArgument(f"init has dimension {cfg.init.size}, target has {target.dim}")


def rbhmc(
    target: Target,
    cs: ConstraintSet,
    cfg: HmcConfig,
    rng: RngLike,
    callback: Callback = None,
) -> Chain:
    """Roll-back HMC: HMC on ``U(x) + sum of boundary energies``.

    ``target.hard_roi`` is ignored; trajectories are never cut short for
    leaving the ROI.  Diverged trajectories count as rejections.
    """
    _check_dim(target, cfg)
    U, gradU = target.potential, target.grad_potential
    if len(cs) == 0:
        potential, grad = U, gradU
    elif len(cs) == 1:
        (c,) = cs.constraints

        def potential(x):
            return U(x) + c.energy(x)

        def grad(x):
            return gradU(x) + c.gradient(x)
    else:

        def potential(x):
            return U(x) + cs.energy(x)

        def grad(x):
            return gradU(x) + cs.gradient(x)

    params = cfg.leapfrog

    def step(state):
        end = leapfrog(state, grad, params)
        u = potential(end.x)
        return end.x, u, end.kinetic() + u

    return _run(step, potential(cfg.init), cfg, rng, "rbhmc", callback)


def baseline_hmc(target: Target, cfg: HmcConfig, rng: RngLike, callback: Callback = None) -> Chain:
    """HMC that rejects any trajectory whose leapfrog positions leave ``hard_roi``."""
    _check_dim(target, cfg)
    if target.hard_roi is None:
        raise InvalidArgument("baseline HMC needs a target with a hard_roi")
    if not target.inside(cfg.init):
        raise InvalidArgument("initial position lies outside the region of interest")
    params = cfg.leapfrog

    def step(state):
        try:
            end = leapfrog(state, target.grad_potential, params, inside=target.inside)
        except LeftRegion:
            raise _Rejected from None
        u = target.potential(end.x)
        return end.x, u, end.kinetic() + u

    return _run(step, target.potential(cfg.init), cfg, rng, "baseline_hmc", callback)


def reflect(p, normal):
    """Mirror ``p`` in the plane orthogonal to ``normal``: tangential part kept, normal part negated."""
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    return p - 2.0 * float(p @ n) * n


def reflective_drift(region, x, p, duration: float, mass: float, max_reflections: int = MAX_REFLECTIONS):
    """Move ``x`` with velocity ``p / mass`` for ``duration``, bouncing off the region wall.

    Returns ``(x, p, n_reflections)``; raises :class:`_Rejected` past the cap.
    """
    remaining = duration
    bounces = 0
    while True:
        v = p / mass
        hit = region.first_exit(x, v, remaining)
        if hit is None:
            return x + remaining * v, p, bounces
        t, normal = hit
        bounces += 1
        if bounces > max_reflections:
            raise _Rejected
        x = x + t * v
        p = reflect(p, normal)
        remaining -= t


def _supports_reflection(region) -> bool:
    if isinstance(region, Intersection):
        return all(_supports_reflection(r) for r in region.regions)
    return isinstance(region, (Ball, HalfSpace))


def rhmc(target: Target, cfg: HmcConfig, rng: RngLike, callback: Callback = None) -> Chain:
    """Reflective HMC on the exact ROI (reflection only, no refraction).

    The region must be a :class:`Ball`, a :class:`HalfSpace` or an
    :class:`Intersection` of those so that crossings have closed forms.
    """
    _check_dim(target, cfg)
    region = target.hard_roi
    if region is None or not _supports_reflection(region):
        raise UnsupportedGeometry(f"reflective HMC cannot intersect trajectories with {region!r}")
    if not target.inside(cfg.init):
        raise InvalidArgument("initial position lies outside the region of interest")
    eps = cfg.leapfrog.step_size
    n_steps = cfg.leapfrog.steps
    gradU = target.grad_potential

    def step(state):
        m = state.mass
        x = state.x
        g = gradU(x)
        p = state.p - 0.5 * eps * g
        for i in range(1, n_steps + 1):
            x, p, _ = reflective_drift(region, x, p, eps, m)
            g = gradU(x)
            if not (np.isfinite(g).all() and np.isfinite(x).all()):
                raise DivergedTrajectory(i)
            p = p - (eps if i < n_steps else 0.5 * eps) * g
        u = target.potential(x)
        return x, u, float(p @ p) / (2.0 * m) + u

    return _run(step, target.potential(cfg.init), cfg, rng, "rhmc", callback)
