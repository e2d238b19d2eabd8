"""File formats: configuration grids, dataset archives and run artifacts.

Floats are written with 17 significant digits so that every value survives
a write/read round trip exactly.  CSV files use ``.`` as decimal separator
and LF line endings.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .lattice import RuleParams, as_configuration
from .scenario import ObservedDataset, ScenarioSpec


def fmt(x) -> str:
    """Round-trip-exact decimal text for a float (empty for NaN)."""
    x = float(x)
    if np.isnan(x):
        return ""
    return format(x, ".17g")


def parse(s: str) -> float:
    return float("nan") if s == "" else float(s)


# -- configurations ----------------------------------------------------------

def config_to_csv(cfg, path) -> None:
    cfg = as_configuration(cfg)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in cfg:
            w.writerow(fmt(v) for v in row)


def config_from_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    return as_configuration(rows)


def config_to_json(cfg) -> dict:
    """JSON envelope ``{height, width, cells}`` with row-major ``cells``."""
    cfg = as_configuration(cfg)
    h, w = cfg.shape
    return {"height": h, "width": w, "cells": [float(fmt(v)) for v in cfg.reshape(-1)]}


def config_from_json(obj) -> np.ndarray:
    h, w = int(obj["height"]), int(obj["width"])
    cells = np.asarray(obj["cells"], dtype=float)
    if cells.size != h * w:
        raise ValueError(f"envelope declares {h}x{w} but holds {cells.size} cells")
    return as_configuration(cells.reshape(h, w))


def write_json(obj, path) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


# -- dataset archives ----------------------------------------------------------

def write_dataset(data: ObservedDataset, directory) -> Path:
    """Write ``observed/step_XXX.csv``, ``clean/step_XXX.csv`` and ``manifest.json``."""
    directory = Path(directory)
    for kind, traj in (("observed", data.observed), ("clean", data.clean)):
        (directory / kind).mkdir(parents=True, exist_ok=True)
        for t, cfg in enumerate(traj):
            config_to_csv(cfg, directory / kind / f"step_{t:03d}.csv")
    spec = data.spec
    manifest = {
        "spec": spec.to_dict(),
        "neighborhood": {
            "topology": spec.topology.value,
            "radius": spec.radius,
            "K": spec.neighborhood.size(),
            "offsets": [list(o) for o in spec.neighborhood.offsets()],
        },
        "truth_theta": [float(fmt(v)) for v in data.truth.weights],
        "seeds": {"scenario": spec.seed, "init": spec.resolved_init_seed()},
        "steps": data.T + 1,
    }
    write_json(manifest, directory / "manifest.json")
    return directory


def read_dataset(directory) -> ObservedDataset:
    directory = Path(directory)
    manifest = read_json(directory / "manifest.json")
    spec = ScenarioSpec.from_dict(manifest["spec"])
    steps = manifest["steps"]
    trajs = {
        kind: np.stack([config_from_csv(directory / kind / f"step_{t:03d}.csv") for t in range(steps)])
        for kind in ("observed", "clean")
    }
    truth = RuleParams(np.asarray(manifest["truth_theta"]), spec.neighborhood)
    return ObservedDataset(spec, truth, trajs["clean"], trajs["observed"])


# -- run artifacts -------------------------------------------------------------

TRACE_COLUMNS = [
    "generation",
    "best_J",
    "p_rand1",
    "p_rand_to_best2",
    "p_rand2",
    "p_current_to_rand1",
    "cvr_rand1",
    "cvr_rand_to_best2",
    "cvr_rand2",
    "cvr_current_to_rand1",
]


def write_traces(result, path) -> None:
    """Per-generation trace of one SaDE run (empty CVR cell: strategy unused)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for g, (J, p, cvr) in enumerate(zip(result.fitness_trace, result.strategy_prob_trace, result.cvr_trace)):
            w.writerow([g, fmt(J), *map(fmt, p), *map(fmt, cvr)])


def read_traces(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = list(zip(*body)) if body else [[] for _ in header]
    return {name: np.array([parse(v) for v in col]) for name, col in zip(header, cols)}


def result_to_dict(result, truth=None, solver="sade", nrmse=None) -> dict:
    """``result.json`` payload shared by SaDE runs and the oracle."""
    out = {"solver": solver}
    theta = result.best_theta.weights if hasattr(result, "best_theta") else result.theta
    out["theta"] = [float(fmt(v)) for v in theta]
    out["fitness"] = float(fmt(result.best_fitness if hasattr(result, "best_fitness") else result.objective))
    if nrmse is not None:
        out["nrmse"] = float(fmt(nrmse))
    if truth is not None:
        out["truth_theta"] = [float(fmt(v)) for v in truth]
    if solver == "sade":
        cfg = result.config
        out["seed"] = result.seed
        out["evaluations"] = result.evaluations
        out["generations"] = len(result.fitness_trace)
        if cfg is not None:
            out["config"] = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
    else:
        out["iterations"] = result.iterations
        out["converged"] = bool(result.converged)
    return out
