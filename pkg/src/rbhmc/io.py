"""CSV / JSON serialisation of chains, datasets and traces.

Floats are written with 17 significant digits so that files round-trip
bit-exactly and repeated runs with the same seed produce identical bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .samplers.chain import Chain

FLOAT_FMT = "%.17g"


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % v
    return str(v)


def write_rows(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_matrix(path, M, prefix: str = "c") -> Path:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    header = [f"{prefix}{j}" for j in range(M.shape[1])]
    return write_rows(path, header, M)


def read_matrix(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def write_chain_csv(chain: Chain, path) -> Path:
    """One row per iteration: ``iteration, accepted, energy, x0, x1, ...``."""
    d = chain.samples.shape[1]
    header = ["iteration", "accepted", "energy"] + [f"x{j}" for j in range(d)]
    rows = (
        (i, bool(a), float(e), *map(float, s))
        for i, (a, e, s) in enumerate(zip(chain.accepted, chain.energies, chain.samples))
    )
    return write_rows(path, header, rows)


def read_chain_csv(path) -> Chain:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Chain(data[:, 3:], data[:, 1].astype(bool), data[:, 2])


def chain_summary(chain: Chain, config: dict | None = None) -> dict:
    kept = chain.kept
    return {
        "sampler": chain.sampler,
        "seed": chain.seed,
        "n_iterations": len(chain),
        "burn_in": chain.burn_in,
        "acceptance_rate": chain.acceptance_rate,
        "n_diverged": chain.n_diverged,
        "mean": kept.mean(axis=0).tolist() if len(kept) else [],
        "config": config or {},
    }


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")
