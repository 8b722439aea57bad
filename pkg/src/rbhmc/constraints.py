"""Smooth boundary potentials for truncation regions.

A truncation boundary is described by a level-set function ``g`` whose
positive side is the region of interest (ROI).  The hard indicator of the ROI
is replaced by the sigmoid ``1 / (1 + exp(-mu * g(x)))``; taking ``-log`` of
that factor gives the boundary energy ``softplus(-mu * g(x))`` that is added to
a target's potential.  Deep inside the ROI the energy vanishes, outside it
grows linearly with slope ``mu * |grad g|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidArgument
from .regions import Ball, HalfSpace, Intersection, LevelSet

BUILTIN_KINDS = ("halfplane_y", "halfplane_diag", "disk2", "parabola", "ball", "hyperplane")
TABLE_ROWS = ("a", "b", "c", "d", "e", "f")


def softplus(z):
    """``log(1 + exp(z))`` without overflow; works on scalars and arrays."""
    if np.ndim(z) == 0:
        z = float(z)
        return max(z, 0.0) + math.log1p(math.exp(-abs(z)))
    z = np.asarray(z, dtype=float)
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def logistic(z):
    """``1 / (1 + exp(-z))``, branching on sign so ``exp`` never overflows."""
    if np.ndim(z) == 0:
        z = float(z)
        if z >= 0.0:
            return 1.0 / (1.0 + math.exp(-z))
        e = math.exp(z)
        return e / (1.0 + e)
    z = np.asarray(z, dtype=float)
    e = np.exp(-np.abs(z))
    return np.where(z >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def sigmoid(t: float, mu: float) -> float:
    """Sharp sigmoid ``1 / (1 + exp(-mu * t))`` approximating the unit step."""
    if not math.isfinite(t):
        raise InvalidArgument(f"sigmoid argument must be finite, got {t!r}")
    if not (mu > 0 and math.isfinite(mu)):
        raise InvalidArgument(f"sharpness mu must be a positive finite number, got {mu!r}")
    return logistic(mu * t)


def _check_mu(mu):
    if not (isinstance(mu, (int, float, np.floating)) and math.isfinite(mu) and mu > 0):
        raise InvalidArgument(f"sharpness mu must be a positive finite number, got {mu!r}")
    return float(mu)


@dataclass(frozen=True)
class Constraint:
    """One truncation boundary ``{x : g(x) > 0}`` with sharpness ``mu``.

    ``grad_g`` must be supplied by the caller; no automatic differentiation is
    attempted.  ``dim`` is optional; when set, positions of another length are
    rejected.  ``region`` is the exact ROI as a :mod:`rbhmc.regions` object
    when one is known, and ``grad_norm`` a representative ``|grad g|`` on the
    boundary, used for step-size advice.
    """

    g: Callable[[np.ndarray], float]
    grad_g: Callable[[np.ndarray], np.ndarray]
    mu: float
    label: str = ""
    dim: int | None = None
    region: object = None
    grad_norm: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mu", _check_mu(self.mu))

    def _check(self, x):
        if self.dim is not None and np.shape(x)[-1] != self.dim:
            raise InvalidArgument(
                f"constraint {self.label or '<anonymous>'} expects dimension {self.dim}, "
                f"got position of shape {np.shape(x)}"
            )

    def energy(self, x) -> float:
        self._check(x)
        return softplus(-self.mu * self.g(x))

    def gradient(self, x) -> np.ndarray:
        self._check(x)
        # d/dx softplus(-mu g) = -mu * logistic(-mu g) * grad g
        return (-self.mu * logistic(-self.mu * self.g(x))) * np.asarray(self.grad_g(x), dtype=float)

    def contains(self, x):
        """Exact ROI membership; vectorised over leading axes for builtins."""
        return np.asarray(self.g(x)) > 0

    @property
    def exact_region(self):
        return self.region if self.region is not None else LevelSet(self.g)


@dataclass(frozen=True)
class CoordinateBarrier:
    """Non-negativity of every coordinate, i.e. one half-line boundary per entry.

    Equivalent to a :class:`ConstraintSet` holding ``g(x) = x_i`` for each
    ``i``, evaluated in a single vectorised pass.  Used for the NMF factors,
    where the state has hundreds of coordinates.
    """

    mu: float
    dim: int
    label: str = "orthant"

    def __post_init__(self):
        object.__setattr__(self, "mu", _check_mu(self.mu))
        if self.dim < 1:
            raise InvalidArgument("orthant dimension must be >= 1")

    def _check(self, x):
        if np.shape(x)[-1] != self.dim:
            raise InvalidArgument(f"orthant expects dimension {self.dim}, got {np.shape(x)}")

    def energy(self, x) -> float:
        self._check(x)
        return float(np.sum(softplus(-self.mu * np.asarray(x, dtype=float))))

    def gradient(self, x) -> np.ndarray:
        self._check(x)
        return -self.mu * logistic(-self.mu * np.asarray(x, dtype=float))

    def contains(self, x):
        return np.all(np.asarray(x) > 0, axis=-1)

    @property
    def exact_region(self):
        return LevelSet(lambda x: np.min(np.asarray(x), axis=-1))


def boundary_energy(c: Constraint, x) -> float:
    """Boundary potential ``log(1 + exp(-mu g(x)))`` of a single constraint."""
    return c.energy(x)


def boundary_gradient(c: Constraint, x) -> np.ndarray:
    """Gradient ``-mu grad_g(x) / (1 + exp(mu g(x)))`` of the boundary potential."""
    return c.gradient(x)


@dataclass(frozen=True)
class ConstraintSet:
    """Ordered collection of boundaries whose energies add up.

    An empty set is allowed and contributes nothing.  Members must agree on
    dimension where they declare one.
    """

    constraints: tuple = field(default_factory=tuple)

    def __post_init__(self):
        cs = tuple(self.constraints)
        object.__setattr__(self, "constraints", cs)
        dims = {c.dim for c in cs if getattr(c, "dim", None) is not None}
        if len(dims) > 1:
            raise InvalidArgument(f"constraints disagree on dimension: {sorted(dims)}")

    @property
    def dim(self) -> int | None:
        for c in self.constraints:
            if getattr(c, "dim", None) is not None:
                return c.dim
        return None

    def __len__(self):
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def __add__(self, other: "ConstraintSet") -> "ConstraintSet":
        return ConstraintSet(self.constraints + tuple(other.constraints))

    def energy(self, x) -> float:
        total = 0.0
        for c in self.constraints:
            total += c.energy(x)
        return total

    def gradient(self, x) -> np.ndarray:
        total = np.zeros(np.shape(x), dtype=float)
        for c in self.constraints:
            total = total + c.gradient(x)
        return total

    def contains(self, x):
        """Membership in the intersection of all member ROIs."""
        inside = np.ones(np.shape(x)[:-1], dtype=bool)
        for c in self.constraints:
            inside &= c.contains(x)
        return inside

    def exact_region(self):
        """The hard ROI as a region object, or ``None`` for an empty set."""
        regions = [c.exact_region for c in self.constraints]
        if not regions:
            return None
        return regions[0] if len(regions) == 1 else Intersection(tuple(regions))


def set_energy(s: ConstraintSet, x) -> float:
    return s.energy(x)


def set_gradient(s: ConstraintSet, x) -> np.ndarray:
    return s.gradient(x)


# --- builtin level sets --------------------------------------------------
# Each g accepts a single position or an array of positions along the last axis.


def _halfplane_y(mu):
    def g(x):
        return np.asarray(x)[..., 1]

    def grad_g(x):
        return np.array([0.0, 1.0])

    return Constraint(g, grad_g, mu, "halfplane_y", 2, HalfSpace(np.array([0.0, 1.0])), 1.0)


def _halfplane_diag(mu):
    def g(x):
        x = np.asarray(x)
        return x[..., 0] - x[..., 1]

    def grad_g(x):
        return np.array([1.0, -1.0])

    return Constraint(g, grad_g, mu, "halfplane_diag", 2, HalfSpace(np.array([1.0, -1.0])), math.sqrt(2.0))


def _disk(mu, radius_sq=2.0):
    def g(x):
        x = np.asarray(x)
        return radius_sq - x[..., 0] ** 2 - x[..., 1] ** 2

    def grad_g(x):
        return np.array([-2.0 * x[0], -2.0 * x[1]])

    return Constraint(g, grad_g, mu, "disk2", 2, Ball(math.sqrt(radius_sq)), 2.0 * math.sqrt(radius_sq))


def _parabola(mu):
    def g(x):
        x = np.asarray(x)
        return x[..., 0] - x[..., 1] ** 2

    def grad_g(x):
        return np.array([1.0, -2.0 * x[1]])

    # |grad g| >= 1 on the boundary, attained at the vertex
    return Constraint(g, grad_g, mu, "parabola", 2, None, 1.0)


def _ball(mu, radius=3.0, dim=None, normalize=False):
    # normalize=True rescales g by 1/(2R): same ROI, unit |grad g| on the sphere
    r2 = float(radius) ** 2
    scale = 1.0 / (2.0 * radius) if normalize else 1.0

    def g(x):
        x = np.asarray(x)
        return scale * (r2 - np.sum(x * x, axis=-1))

    def grad_g(x):
        return (-2.0 * scale) * np.asarray(x, dtype=float)

    label = "ball_normalized" if normalize else "ball"
    return Constraint(
        g, grad_g, mu, label, None if dim is None else int(dim), Ball(float(radius)), 2.0 * radius * scale
    )


def _hyperplane(mu, normal=None, offset=0.0):
    if normal is None:
        raise InvalidArgument("hyperplane constraint needs a normal vector")
    n = np.asarray(normal, dtype=float).ravel()
    if not np.any(n):
        raise InvalidArgument("hyperplane normal must be non-zero")
    b = float(offset)

    def g(x):
        return np.asarray(x) @ n - b

    def grad_g(x):
        return n.copy()

    return Constraint(g, grad_g, mu, "hyperplane", n.size, HalfSpace(n, b), float(np.linalg.norm(n)))


def builtin_constraint(kind: str, mu: float, **params) -> Constraint:
    """Construct one of the named boundaries.

    ``halfplane_y``: ``g = y``; ``halfplane_diag``: ``g = x - y``;
    ``disk2``: ``g = 2 - x^2 - y^2``; ``parabola``: ``g = x - y^2``;
    ``ball``: ``g = R^2 - |x|^2`` (params ``radius``, ``dim``, ``normalize``;
    the latter divides ``g`` by ``2R``);
    ``hyperplane``: ``g = n.x - b`` (params ``normal``, ``offset``).
    """
    _check_mu(mu)
    try:
        if kind == "halfplane_y":
            return _halfplane_y(mu, **params)
        if kind == "halfplane_diag":
            return _halfplane_diag(mu, **params)
        if kind == "disk2":
            return _disk(mu, **params)
        if kind == "parabola":
            return _parabola(mu, **params)
        if kind == "ball":
            return _ball(mu, **params)
        if kind == "hyperplane":
            return _hyperplane(mu, **params)
    except TypeError as exc:
        raise InvalidArgument(f"bad parameters for constraint {kind!r}: {exc}") from None
    raise InvalidArgument(f"unknown constraint kind {kind!r}; expected one of {BUILTIN_KINDS}")


def table_constraints(row: str, mu: float) -> ConstraintSet:
    """The six 2D truncation setups used for the truncated Gaussian study.

    (a) none, (b) upper half-plane, (c) wedge ``y > 0, x > y``, (d) disk of
    radius sqrt(2), (e) upper half-disk, (f) inside the parabola ``x > y^2``.
    """
    rows = {
        "a": (),
        "b": ("halfplane_y",),
        "c": ("halfplane_y", "halfplane_diag"),
        "d": ("disk2",),
        "e": ("disk2", "halfplane_y"),
        "f": ("parabola",),
    }
    if row not in rows:
        raise InvalidArgument(f"unknown boundary row {row!r}; expected one of {TABLE_ROWS}")
    return ConstraintSet(tuple(builtin_constraint(k, mu) for k in rows[row]))


def orthant(mu: float, dim: int) -> ConstraintSet:
    return ConstraintSet((CoordinateBarrier(mu, dim),))


def parse_constraint(spec: str) -> Constraint:
    """Parse ``name:mu=VALUE[,param=VALUE...]`` into a builtin constraint.

    Vector parameters (``normal``) use ``;`` between components, e.g.
    ``hyperplane:mu=100,normal=1;0,offset=0``.
    """
    name, _, rest = spec.partition(":")
    name = name.strip()
    params: dict = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise InvalidArgument(f"malformed constraint parameter {item!r} in {spec!r}")
        key = key.strip()
        if key == "normal":
            params[key] = [float(v) for v in value.split(";")]
        elif key == "dim":
            params[key] = int(value)
        elif key == "normalize":
            params[key] = value.strip().lower() in ("1", "true", "yes")
        else:
            try:
                params[key] = float(value)
            except ValueError:
                raise InvalidArgument(f"non-numeric value for {key!r} in {spec!r}") from None
    if "mu" not in params:
        raise InvalidArgument(f"constraint {spec!r} is missing mu=VALUE")
    mu = params.pop("mu")
    return builtin_constraint(name, mu, **params)
