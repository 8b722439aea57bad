"""Command-line entry point: ``rbhmc {sample,experiment,gen}``.

Exit codes: 0 success, 2 configuration error, 3 sampler/runtime error.
Run outputs go to ``--out`` or, failing that, a fresh directory under
``$RBHMC_OUTPUT_ROOT`` (default ``./runs``).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import harness, io
from .constraints import ConstraintSet, parse_constraint
from .datagen import gen_diag_A, gen_nmf_dataset
from .errors import DivergedTrajectory, InvalidArgument, UnsupportedGeometry
from .integrator import LeapfrogParams, step_size_bound
from .samplers import HmcConfig, baseline_hmc, make_rng, rbhmc, rhmc
from .targets import exponential, gaussian_std, norm_potential

log = logging.getLogger("rbhmc")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
TARGETS = ("gaussian", "gaussian1d", "gaussian2d", "exponential", "norm")
SAMPLERS = ("rbhmc", "baseline", "rhmc")
SAMPLE_DEFAULTS = dict(sampler="rbhmc", mass=1.0, burn_in=0, constraints=[], radius=3.0)


class ConfigError(Exception):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def output_root() -> Path:
    return Path(os.environ.get("RBHMC_OUTPUT_ROOT", "runs"))


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


# --- sample --------------------------------------------------------------------


def _sample_config(args) -> dict:
    cfg = dict(SAMPLE_DEFAULTS)
    if args.config:
        try:
            cfg.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from None
    for key in ("target", "dim", "a_diag", "a_seed", "radius", "sampler", "eps", "L", "mass",
                "n", "burn_in", "seed", "init", "out"):
        value = getattr(args, key)
        if value is not None:
            cfg[key] = value
    if args.constraint:
        cfg["constraints"] = list(args.constraint)
    for key in ("target", "eps", "L", "n", "seed"):
        if cfg.get(key) is None:
            raise ConfigError(key, "missing required parameter")
    return cfg


def _build_target(cfg):
    name = cfg["target"]
    if name not in TARGETS:
        raise ConfigError("target", f"unknown target {name!r}; expected one of {TARGETS}")
    if name == "gaussian1d":
        return gaussian_std(1)
    if name == "gaussian2d":
        return gaussian_std(2)
    if name == "gaussian":
        return gaussian_std(int(cfg.get("dim") or 2))
    if name == "exponential":
        return exponential(1.0)
    if cfg.get("a_diag") is not None:
        a = np.asarray(_floats(cfg["a_diag"]))
    else:
        if cfg.get("dim") is None:
            raise ConfigError("dim", "norm target needs --dim (with --a-seed) or --a-diag")
        a = gen_diag_A(int(cfg["dim"]), make_rng(int(cfg.get("a_seed") or 0)))
        cfg["a_diag"] = a.tolist()
    return norm_potential(a, float(cfg["radius"]))


def _build_constraints(cfg) -> ConstraintSet:
    out = []
    for spec in cfg.get("constraints") or []:
        try:
            out.append(parse_constraint(spec))
        except InvalidArgument as exc:
            raise ConfigError("constraint", str(exc)) from None
    return ConstraintSet(tuple(out))


def _warn_step_size(eps, mass, cs):
    for c in cs:
        gn = getattr(c, "grad_norm", None)
        if gn:
            bound = step_size_bound(c.mu, mass, gn)
            if eps > bound:
                log.warning(
                    "step size %g exceeds step-size bound %g for constraint %s (mu=%g)", eps, bound, c.label, c.mu
                )


def cmd_sample(args) -> int:
    cfg = _sample_config(args)
    target = _build_target(cfg)
    cs = _build_constraints(cfg)
    sampler = cfg["sampler"]
    if sampler not in SAMPLERS:
        raise ConfigError("sampler", f"unknown sampler {sampler!r}; expected one of {SAMPLERS}")
    if cs.dim is not None and cs.dim != target.dim:
        raise ConfigError("constraint", f"constraint dimension {cs.dim} does not match target dimension {target.dim}")
    init = np.asarray(_floats(cfg["init"]) if cfg.get("init") is not None else np.zeros(target.dim))
    if init.size != target.dim:
        raise ConfigError("init", f"expected {target.dim} coordinates, got {init.size}")
    try:
        hmc = HmcConfig(LeapfrogParams(float(cfg["eps"]), int(cfg["L"])), int(cfg["n"]), init,
                        float(cfg["mass"]), int(cfg["burn_in"]))
    except InvalidArgument as exc:
        raise ConfigError("hmc", str(exc)) from None
    _warn_step_size(hmc.leapfrog.step_size, hmc.mass, cs)

    if sampler != "rbhmc" and len(cs):
        # exact samplers truncate to the intersection of the constraint regions
        target = dataclasses.replace(target, hard_roi=cs.exact_region())
    if sampler != "rbhmc" and target.hard_roi is None:
        raise ConfigError("sampler", f"{sampler} needs a truncation: give --constraint or a truncated target")
    if sampler != "rbhmc" and not target.inside(init):
        raise ConfigError("init", "initial position lies outside the region of interest")

    seed = int(cfg["seed"])
    out = Path(cfg["out"]) if cfg.get("out") else harness.run_dir(output_root(), "sample", seed)
    out.mkdir(parents=True, exist_ok=True)
    echo = {k: v for k, v in cfg.items() if k != "out"}
    echo["init"] = init.tolist()
    io.write_json(echo, out / "config.json")
    try:
        if sampler == "rbhmc":
            chain = rbhmc(target, cs, hmc, seed)
        elif sampler == "baseline":
            chain = baseline_hmc(target, hmc, seed)
        else:
            chain = rhmc(target, hmc, seed)
    except (UnsupportedGeometry, DivergedTrajectory, FloatingPointError) as exc:
        print(f"error: sampler failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    io.write_chain_csv(chain, out / "chain.csv")
    io.write_json(io.chain_summary(chain, echo), out / "summary.json")
    print(f"wrote {out / 'chain.csv'} (acceptance rate {chain.acceptance_rate:.4f})")
    return EXIT_OK


# --- experiment ------------------------------------------------------------------


def _experiment_config(args) -> dict:
    scale = "full" if args.paper_scale else "desk"
    cfg = dict(harness.PRESETS[args.name][scale])
    overrides = {
        "truncated-gaussian": dict(n_samples=args.n, mu=args.mu, eps=args.eps, L=args.L,
                                   boundary_kind=args.boundary),
        "wmae": dict(D=args.dim, rounds=args.rounds, eps=args.eps, L=args.L, mu=args.mu,
                     budget=args.iters, time_budget=args.time_budget, threads=args.threads),
        "nmf": dict(n=args.n, rounds=args.rounds, eps=args.eps, L=args.L, mu=args.mu, iters=args.iters,
                    sigma=args.sigma, noise_sd=args.noise, threads=args.threads),
    }[args.name]
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    if args.name == "truncated-gaussian":
        cfg.setdefault("boundary_kind", "b")
    cfg["seed"] = args.seed
    return cfg


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    print(json.dumps({"experiment": args.name, "scale": "full" if args.paper_scale else "desk", **cfg},
                     sort_keys=True))
    if args.dry_run:
        return EXIT_OK
    fn = {"truncated-gaussian": harness.exp_truncated_gaussian, "wmae": harness.exp_wmae,
          "nmf": harness.exp_nmf}[args.name]
    try:
        report = fn(**cfg)
    except InvalidArgument as exc:
        raise ConfigError(args.name, str(exc)) from None
    out = Path(args.out) if args.out else harness.run_dir(output_root(), args.name, args.seed)
    harness.write_report(report, out, plots=args.plots)
    print(json.dumps(report.summary, sort_keys=True, default=io._json_default))
    print(f"report written to {out}")
    return EXIT_OK


# --- gen -------------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.sidecar:
        side = json.loads(Path(args.sidecar).read_text())
        args.kind = side.get("kind", args.kind)
        args.n, args.noise, args.seed, args.dim = side.get("n"), side.get("noise_sd"), side["seed"], side.get("dim")
    if args.kind == "nmf":
        if args.n is None or args.n <= 0:
            raise ConfigError("n", "must be a positive integer")
        if args.noise is None or args.noise < 0:
            raise ConfigError("noise", "must be non-negative")
        out = Path(args.out) if args.out else harness.run_dir(output_root(), "gen-nmf", args.seed)
        out.mkdir(parents=True, exist_ok=True)
        ds = gen_nmf_dataset(args.n, args.noise, make_rng(args.seed))
        io.write_matrix(out / "X.csv", ds.X, "pix")
        io.write_matrix(out / "W_true.csv", ds.W_true, "k")
        io.write_matrix(out / "A_true.csv", ds.A_true, "pix")
        io.write_json(dict(kind="nmf", n=args.n, noise_sd=args.noise, seed=args.seed,
                           files=["X.csv", "W_true.csv", "A_true.csv"]), out / "dataset.json")
    else:
        if args.dim is None or args.dim <= 0:
            raise ConfigError("dim", "must be a positive integer")
        out = Path(args.out) if args.out else harness.run_dir(output_root(), "gen-diag-a", args.seed)
        out.mkdir(parents=True, exist_ok=True)
        a = gen_diag_A(args.dim, make_rng(args.seed))
        io.write_rows(out / "a_diag.csv", ["a_diag"], ((v,) for v in a))
        io.write_json(dict(kind="diag-a", dim=args.dim, seed=args.seed, files=["a_diag.csv"]),
                      out / "dataset.json")
    print(f"dataset written to {out}")
    return EXIT_OK


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rbhmc", description="Roll-back HMC for truncated distributions")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="draw one chain")
    s.add_argument("--config", help="JSON file with any of the options below (flags override)")
    s.add_argument("--target", help=f"one of {', '.join(TARGETS)}")
    s.add_argument("--dim", type=int)
    s.add_argument("--a-diag", dest="a_diag", help="comma-separated diagonal for the norm target")
    s.add_argument("--a-seed", dest="a_seed", type=int, help="seed for a random norm-target diagonal")
    s.add_argument("--radius", type=float)
    s.add_argument("--sampler", help=f"one of {', '.join(SAMPLERS)} (default rbhmc)")
    s.add_argument("--constraint", action="append", metavar="NAME:mu=V[,k=v]",
                   help="boundary; repeat for several")
    s.add_argument("--eps", type=float, help="leapfrog step size")
    s.add_argument("--L", type=int, help="leapfrog steps per trajectory")
    s.add_argument("--mass", type=float)
    s.add_argument("--n", type=int, help="number of iterations")
    s.add_argument("--burn-in", dest="burn_in", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--init", help="comma-separated starting position (default origin)")
    s.add_argument("--out", help="output directory")
    s.set_defaults(func=cmd_sample)

    e = sub.add_parser("experiment", help="run one of the bundled studies")
    e.add_argument("name", choices=tuple(harness.PRESETS))
    e.add_argument("--paper-scale", action="store_true", help="full-size settings instead of desk scale")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out")
    e.add_argument("--boundary", choices=("a", "b", "c", "d", "e", "f"))
    e.add_argument("--dim", type=int)
    e.add_argument("--rounds", type=int)
    e.add_argument("--iters", type=int, help="iteration budget per chain")
    e.add_argument("--time-budget", dest="time_budget", type=float, help="seconds per chain (wmae)")
    e.add_argument("--n", type=int, help="samples (truncated-gaussian) or images (nmf)")
    e.add_argument("--eps", type=float)
    e.add_argument("--L", type=int)
    e.add_argument("--mu", type=float)
    e.add_argument("--sigma", type=float)
    e.add_argument("--noise", type=float)
    e.add_argument("--threads", type=int)
    e.add_argument("--plots", action="store_true", help="also write SVG figures")
    e.add_argument("--dry-run", dest="dry_run", action="store_true", help="echo the configuration and stop")
    e.set_defaults(func=cmd_experiment)

    g = sub.add_parser("gen", help="generate synthetic data")
    g.add_argument("kind", choices=("nmf", "diag-a"))
    g.add_argument("--n", type=int)
    g.add_argument("--noise", type=float, default=0.5)
    g.add_argument("--dim", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--sidecar", help="regenerate from a previous dataset.json")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
