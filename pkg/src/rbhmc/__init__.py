"""Roll-back Hamiltonian Monte Carlo for truncated distributions."""

from .constraints import (
    Constraint,
    ConstraintSet,
    CoordinateBarrier,
    boundary_energy,
    boundary_gradient,
    builtin_constraint,
    parse_constraint,
    set_energy,
    set_gradient,
    sigmoid,
    table_constraints,
)
from .errors import DivergedTrajectory, InvalidArgument, UnsupportedGeometry
from .integrator import LeapfrogParams, PhaseState, hamiltonian, leapfrog, step_size_bound
from .samplers import Chain, HmcConfig, baseline_hmc, gibbs_nmf, make_rng, rbhmc, rhmc
from .targets import Ball, HalfSpace, NmfModel, Target, gaussian_std, nmf_gradient, nmf_potential, norm_potential

__version__ = "0.1.0"
