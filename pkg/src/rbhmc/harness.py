"""End-to-end experiments: truncated 2D Gaussians, the WMAE mixing study and Bayesian NMF.

Every experiment is a pure function of its arguments (including the master
seed) except for wall-clock timings, which are kept apart from the traces.
Independent random streams are derived as ``make_rng(seed, stream)``.
"""

from __future__ import annotations

import datetime as _dt
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .constraints import ConstraintSet, TABLE_ROWS, builtin_constraint, table_constraints
from .datagen import gen_diag_A, gen_nmf_dataset
from .diagnostics import bin_average, cumulative_wmae, hist_l1_error, histogram2d, mean_abs_diff
from .errors import InvalidArgument
from .integrator import LeapfrogParams
from .samplers import HmcConfig, baseline_hmc, gibbs_nmf, make_rng, rbhmc, rhmc
from .targets import NmfModel, gaussian_std, norm_potential

log = logging.getLogger(__name__)

WMAE_SAMPLERS = ("rbhmc", "rhmc", "baseline_hmc")
NMF_SAMPLERS = ("rbhmc", "gibbs")
# reported averages from the full-size NMF run; informational only
NMF_FULL_SCALE_REFERENCE = {"rbhmc": 0.4023819, "gibbs": 0.4065109}

PRESETS = {
    "truncated-gaussian": {
        "desk": dict(n_samples=20000, mu=500.0, eps=0.004, L=100),
        "full": dict(n_samples=100000, mu=500.0, eps=0.004, L=100),
    },
    "wmae": {
        "desk": dict(D=20, rounds=3, eps=0.0167, L=600, mu=100.0, budget=2000, time_budget=None),
        "full": dict(D=20, rounds=10, eps=0.0167, L=600, mu=100.0, budget=100000, time_budget=60.0),
    },
    "nmf": {
        "desk": dict(n=200, K=4, iters=500, rounds=3, eps=0.002, L=200, mu=200.0, lam=1.0, sigma=0.5),
        "full": dict(n=1000, K=4, iters=2000, rounds=10, eps=0.002, L=200, mu=200.0, lam=1.0, sigma=0.5),
    },
}


@dataclass
class ExperimentReport:
    name: str
    config: dict
    traces: dict
    summary: dict
    timings: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)


def _stream(seed: int, round_: int, arm: int) -> np.random.Generator:
    return make_rng(seed, 1000 + 16 * round_ + arm)


def _map(fn, jobs, threads: int):
    if threads <= 1:
        return [fn(*j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda j: fn(*j), jobs))


class _Clock:
    """Per-iteration elapsed times; optionally stops a chain after ``budget`` seconds."""

    def __init__(self, budget=None):
        self.budget = budget
        self.start = time.perf_counter()
        self.elapsed = []

    def __call__(self, i, x, acc):
        t = time.perf_counter() - self.start
        self.elapsed.append(t)
        return self.budget is not None and t >= self.budget


# --- truncated 2D Gaussian -------------------------------------------------


def truncated_gaussian_density(row: str):
    """Standard 2D normal density restricted to the row's exact ROI (unnormalised)."""
    cs = table_constraints(row, 1.0)

    def density(X, Y):
        P = np.stack([X, Y], axis=-1)
        return np.exp(-0.5 * (X * X + Y * Y)) / (2 * math.pi) * cs.contains(P)

    return density


def exp_truncated_gaussian(
    boundary_kind: str = "b",
    n_samples: int = 20000,
    mu: float = 500.0,
    eps: float = 0.004,
    L: int = 100,
    seed: int = 0,
    init=(0.5, 0.25),
    bin_width: float = 0.5,
    extent: float = 3.0,
    sub: int = 16,
    burn_in: int = 0,
) -> ExperimentReport:
    """RBHMC on a standard 2D Gaussian under one of the rows ``a``-``f``.

    The histogram over ``[-extent, extent]^2`` is compared with the exact
    truncated density renormalised over the same box (bin averages by a
    ``sub x sub`` midpoint rule), so both sides integrate to one.
    """
    if boundary_kind not in TABLE_ROWS:
        raise InvalidArgument(f"unknown boundary kind {boundary_kind!r}; expected one of {TABLE_ROWS}")
    config = dict(
        experiment="truncated-gaussian", boundary_kind=boundary_kind, n_samples=n_samples, mu=mu,
        eps=eps, L=L, seed=seed, init=list(map(float, init)), bin_width=bin_width, extent=extent,
        sub=sub, burn_in=burn_in,
    )
    cs = table_constraints(boundary_kind, mu)
    cfg = HmcConfig(LeapfrogParams(eps, L), n_samples, np.asarray(init, dtype=float), burn_in=burn_in)
    clock = _Clock()
    chain = rbhmc(gaussian_std(2), cs, cfg, make_rng(seed), callback=clock)
    chain.seed = seed

    kept = chain.kept
    edges = np.arange(-extent, extent + bin_width / 2, bin_width)
    hist = histogram2d(kept, edges, edges)
    raw = truncated_gaussian_density(boundary_kind)
    ref = bin_average(raw, edges, edges, sub)
    mass = float(np.sum(ref * hist.areas))

    def density(X, Y):
        return raw(X, Y) / mass

    l1 = hist_l1_error(hist, density, sub)
    outside = float(np.mean(~cs.contains(kept)))
    summary = dict(
        l1_error=l1,
        out_of_roi_fraction=outside,
        mean=kept.mean(axis=0).tolist(),
        acceptance_rate=chain.acceptance_rate,
        n_diverged=chain.n_diverged,
        overflow=hist.overflow,
        roi_mass_in_box=mass,
    )
    return ExperimentReport(
        "truncated-gaussian",
        config,
        traces=dict(chain=chain, histogram=hist, reference=ref / mass),
        summary=summary,
        timings=dict(elapsed_s=clock.elapsed[-1] if clock.elapsed else 0.0),
    )


# --- WMAE study on the truncated norm potential ----------------------------


def uniform_in_ball(dim: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    d = rng.standard_normal(dim)
    d /= np.linalg.norm(d)
    return d * radius * rng.random() ** (1.0 / dim)


def _wmae_arm(name, target, cs, cfg, rng, time_budget):
    clock = _Clock(time_budget)
    if name == "rbhmc":
        chain = rbhmc(target, cs, cfg, rng, callback=clock)
    elif name == "rhmc":
        chain = rhmc(target, cfg, rng, callback=clock)
    elif name == "baseline_hmc":
        chain = baseline_hmc(target, cfg, rng, callback=clock)
    else:
        raise InvalidArgument(f"unknown sampler {name!r}")
    return chain, np.asarray(clock.elapsed)


def exp_wmae(
    D: int = 20,
    rounds: int = 3,
    eps: float = 0.0167,
    L: int = 600,
    mu: float = 100.0,
    budget: int = 2000,
    seed: int = 0,
    time_budget: float | None = None,
    samplers=WMAE_SAMPLERS,
    radius: float = 3.0,
    threads: int = 1,
) -> ExperimentReport:
    """Cumulative WMAE of RBHMC, RHMC and reject-on-exit HMC on ``sqrt(x^T A x)`` in a ball.

    Each round draws a fresh diagonal ``A`` and one random starting point in
    the ball shared by all samplers.  Chains stop after ``budget`` iterations
    or, if given, ``time_budget`` seconds.  RBHMC uses the ball boundary
    ``(R^2 - |x|^2) / (2R)``, whose gradient has unit norm on the sphere.
    """
    if D < 1:
        raise InvalidArgument("D must be >= 1")
    if rounds < 1:
        raise InvalidArgument("rounds must be >= 1")
    for s in samplers:
        if s not in WMAE_SAMPLERS:
            raise InvalidArgument(f"unknown sampler {s!r}; expected a subset of {WMAE_SAMPLERS}")
    config = dict(
        experiment="wmae", D=D, rounds=rounds, eps=eps, L=L, mu=mu, budget=budget, seed=seed,
        time_budget=time_budget, samplers=list(samplers), radius=radius, boundary="ball_normalized",
    )
    setups = []
    for r in range(rounds):
        rr = make_rng(seed, r)
        a = gen_diag_A(D, rr)
        init = uniform_in_ball(D, radius, rr)
        target = norm_potential(a, radius)
        cs = ConstraintSet((builtin_constraint("ball", mu, radius=radius, dim=D, normalize=True),))
        cfg = HmcConfig(LeapfrogParams(eps, L), budget, init)
        setups.append((a, init, target, cs, cfg))

    jobs = [
        (s, setups[r][2], setups[r][3], setups[r][4], _stream(seed, r, WMAE_SAMPLERS.index(s)), time_budget)
        for r in range(rounds)
        for s in samplers
    ]
    results = iter(_map(_wmae_arm, jobs, threads))

    traces = {"wmae": {s: [] for s in samplers}, "accepted": {s: [] for s in samplers}}
    timings = {s: [] for s in samplers}
    for r in range(rounds):
        for s in samplers:
            chain, elapsed = next(results)
            traces["wmae"][s].append(cumulative_wmae(chain.samples))
            traces["accepted"][s].append(chain.accepted.copy())
            timings[s].append(elapsed)
    traces["a_diag"] = [st[0] for st in setups]
    traces["init"] = [st[1] for st in setups]
    return ExperimentReport("wmae", config, traces, summarize_wmae(traces, samplers), timings)


def summarize_wmae(traces: dict, samplers) -> dict:
    summary = {}
    for s in samplers:
        finals = [float(w[-1]) for w in traces["wmae"][s]]
        acc = [float(np.mean(a)) for a in traces["accepted"][s]]
        summary[s] = dict(
            final_wmae=finals,
            final_wmae_mean=float(np.mean(finals)),
            final_wmae_sd=float(np.std(finals)),
            acceptance_rate=acc,
            acceptance_rate_mean=float(np.mean(acc)),
            iterations=[len(w) for w in traces["wmae"][s]],
        )
    if "rbhmc" in samplers and "baseline_hmc" in samplers:
        summary["rbhmc_beats_baseline_rounds"] = int(
            sum(a < b for a, b in zip(summary["rbhmc"]["final_wmae"], summary["baseline_hmc"]["final_wmae"]))
        )
    return summary


# --- Bayesian NMF -----------------------------------------------------------


def _nmf_arm(name, model, init, iters, eps, L, rng):
    if name == "rbhmc":
        cfg = HmcConfig(LeapfrogParams(eps, L), iters, model.pack(*init))
        chain = rbhmc(model.target(), model.constraints(), cfg, rng)
    elif name == "gibbs":
        chain = gibbs_nmf(model, iters, rng, init=init)
    else:
        raise InvalidArgument(f"unknown sampler {name!r}")
    diffs = np.array([mean_abs_diff(*model.unpack(v), model.X) for v in chain.samples])
    return diffs, chain.acceptance_rate, model.unpack(chain.samples[-1])[1].copy()


def exp_nmf(
    n: int = 200,
    K: int = 4,
    iters: int = 500,
    rounds: int = 3,
    eps: float = 0.002,
    L: int = 200,
    mu: float = 200.0,
    lam: float = 1.0,
    sigma: float = 0.5,
    seed: int = 0,
    noise_sd: float = 0.5,
    burn_in: int = 100,
    samplers=NMF_SAMPLERS,
    threads: int = 1,
) -> ExperimentReport:
    """RBHMC versus Gibbs on the synthetic 6x6 image data.

    One dataset per call; each round starts both samplers from the same draw
    of the exponential priors.  The per-iteration trace is the mean absolute
    reconstruction error of the current sample.
    """
    if iters <= burn_in:
        raise InvalidArgument("iters must exceed burn_in")
    for s in samplers:
        if s not in NMF_SAMPLERS:
            raise InvalidArgument(f"unknown sampler {s!r}; expected a subset of {NMF_SAMPLERS}")
    config = dict(
        experiment="nmf", n=n, K=K, iters=iters, rounds=rounds, eps=eps, L=L, mu=mu, lambda_W=lam,
        lambda_A=lam, sigma=sigma, seed=seed, noise_sd=noise_sd, burn_in=burn_in, samplers=list(samplers),
    )
    ds = gen_nmf_dataset(n, noise_sd, make_rng(seed))
    model = NmfModel(ds.X, K, lam, lam, sigma, mu)
    inits = []
    for r in range(rounds):
        rr = make_rng(seed, 1 + r)
        inits.append((rr.exponential(1.0 / lam, (n, K)), rr.exponential(1.0 / lam, (K, ds.X.shape[1]))))
    jobs = [
        (s, model, inits[r], iters, eps, L, _stream(seed, r, NMF_SAMPLERS.index(s)))
        for r in range(rounds)
        for s in samplers
    ]
    t0 = time.perf_counter()
    results = iter(_map(_nmf_arm, jobs, threads))
    traces = {"diff": {s: [] for s in samplers}, "acceptance": {s: [] for s in samplers}, "A_last": {}}
    for r in range(rounds):
        for s in samplers:
            diffs, acc, A_last = next(results)
            traces["diff"][s].append(diffs)
            traces["acceptance"][s].append(acc)
            if r == 0:
                traces["A_last"][s] = A_last
    traces["dataset"] = ds
    summary = summarize_nmf(traces, samplers, burn_in)
    summary["noise_floor"] = mean_abs_diff(ds.W_true, ds.A_true, ds.X)
    summary["full_scale_reference"] = dict(NMF_FULL_SCALE_REFERENCE)
    return ExperimentReport("nmf", config, traces, summary, dict(elapsed_s=time.perf_counter() - t0))


def summarize_nmf(traces: dict, samplers, burn_in: int) -> dict:
    """Post-burn-in mean over rounds and iterations; across-round sd averaged over iterations."""
    summary = {}
    for s in samplers:
        D = np.vstack(traces["diff"][s])[:, burn_in:]
        summary[s] = dict(
            mean_diff=float(D.mean()),
            mean_round_sd=float(D.std(axis=0).mean()),
            per_round_mean=D.mean(axis=1).tolist(),
            acceptance_rate=[float(a) for a in traces["acceptance"][s]],
        )
    return summary


# --- persistence -------------------------------------------------------------


def run_dir(root, name: str, seed: int) -> Path:
    stamp = _dt.datetime.now().strftime("%Y%m%d-%H%M%S")
    path = Path(root) / f"{name}_{stamp}_seed{seed}"
    path.mkdir(parents=True, exist_ok=False)
    return path


def write_report(report: ExperimentReport, out_dir, plots: bool = False) -> list:
    """Write ``report.json`` plus CSV traces (and SVG plots if asked) into ``out_dir``.

    CSV files depend only on (config, seed); ``timing.csv`` and the
    ``timings`` entry of ``report.json`` hold wall-clock data.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if report.name == "truncated-gaussian":
        paths += _write_truncated(report, out)
    elif report.name == "wmae":
        paths += _write_wmae(report, out)
    elif report.name == "nmf":
        paths += _write_nmf(report, out)
    if plots:
        from . import plots as _plots

        paths += _plots.plot_report(report, out)
    report.artifacts = [p.name for p in paths] + ["report.json"]
    doc = dict(
        name=report.name, config=report.config, summary=report.summary,
        artifacts=report.artifacts, timings=_timing_summary(report),
    )
    io.write_json(doc, out / "report.json")
    return paths + [out / "report.json"]


def _timing_summary(report):
    t = report.timings
    if report.name == "wmae":
        return {s: [float(e[-1]) if len(e) else 0.0 for e in v] for s, v in t.items()}
    return t


def _write_truncated(report, out):
    chain = report.traces["chain"]
    hist = report.traces["histogram"]
    ref = report.traces["reference"]
    rows = []
    xe, ye = hist.x_edges, hist.y_edges
    for i in range(len(xe) - 1):
        for j in range(len(ye) - 1):
            rows.append((i, j, xe[i], xe[i + 1], ye[j], ye[j + 1], hist.density[i, j], ref[i, j]))
    return [
        io.write_chain_csv(chain, out / "chain.csv"),
        io.write_rows(
            out / "histogram.csv",
            ["ix", "iy", "x_lo", "x_hi", "y_lo", "y_hi", "density", "reference"],
            rows,
        ),
    ]


def _write_wmae(report, out):
    samplers = report.config["samplers"]
    rows, trows = [], []
    for s in samplers:
        for r, (w, a) in enumerate(zip(report.traces["wmae"][s], report.traces["accepted"][s])):
            rows += [(r, s, i, w[i], bool(a[i])) for i in range(len(w))]
            for i, t in enumerate(report.timings[s][r]):
                trows.append((r, s, i, float(t)))
    setup = [
        (r, d, a, x0)
        for r, (av, xv) in enumerate(zip(report.traces["a_diag"], report.traces["init"]))
        for d, (a, x0) in enumerate(zip(av, xv))
    ]
    return [
        io.write_rows(out / "wmae_trace.csv", ["round", "sampler", "iteration", "wmae", "accepted"], rows),
        io.write_rows(out / "setup.csv", ["round", "dim", "a_diag", "init"], setup),
        io.write_rows(out / "timing.csv", ["round", "sampler", "iteration", "elapsed_s"], trows),
    ]


def _write_nmf(report, out):
    samplers = report.config["samplers"]
    rows = []
    for s in samplers:
        for r, d in enumerate(report.traces["diff"][s]):
            rows += [(r, s, i, d[i]) for i in range(len(d))]
    paths = [io.write_rows(out / "diff_trace.csv", ["round", "sampler", "iteration", "diff"], rows)]
    for s, A in report.traces["A_last"].items():
        paths.append(io.write_matrix(out / f"A_last_{s}.csv", A, "pix"))
    return paths
