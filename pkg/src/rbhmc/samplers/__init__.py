from .chain import Chain, HmcConfig, as_rng, make_rng, metropolis_accept
from .gibbs import gibbs_nmf, gibbs_sweep
from .hmc import baseline_hmc, reflect, reflective_drift, rbhmc, rhmc
from .truncnorm import truncnorm_lower

__all__ = [
    "Chain",
    "HmcConfig",
    "as_rng",
    "baseline_hmc",
    "gibbs_nmf",
    "gibbs_sweep",
    "make_rng",
    "metropolis_accept",
    "rbhmc",
    "reflect",
    "reflective_drift",
    "rhmc",
    "truncnorm_lower",
]
