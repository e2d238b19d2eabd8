"""Suite runner: many scenarios, many seeded SaDE runs, aggregated reports.

Output layout of :func:`run_suite`::

    out/
      suite.json                      scenario specs with resolved seeds
      report.json, report.csv         per-scenario statistics
      NN-<scenario>/
        dataset/                      archive written by camid.io.write_dataset
        runs/run_XXX/result.json
        runs/run_XXX/traces.csv
        traces/convergence.csv        aggregated over runs
        traces/strategy_probabilities.csv
        traces/cvr.csv
        oracle.json                   with --oracle

Seeds: scenario ``i`` gets ``derive_seed(master, "scenario", i)``, every
scenario shares the initial configuration seed ``derive_seed(master, "init")``
and run ``k`` of scenario ``i`` uses ``derive_seed(master, "run", i, k)``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from . import io
from .lattice import WeightScheme
from .objective import IdentificationProblem
from .oracle import solve_projected_subgradient
from .sade import SadeConfig, Strategy
from .sade import run as run_sade
from .scenario import ScenarioSpec, build_dataset
from .seeding import derive_seed

log = logging.getLogger(__name__)

THREADS_ENV = "CAMID_THREADS"
BUILTIN_SUITES = ("standard", "desk", "ci")

REPORT_COLUMNS = [
    "scenario", "topology", "radius", "K", "theta_scheme", "height", "width", "T", "snr_db", "runs",
    "nrmse_best", "nrmse_mean", "nrmse_sd", "nrmse_max",
    "J_best", "J_mean", "J_sd", "J_max",
]


def nrmse(theta_hat, theta) -> float:
    """Root-mean-square parameter error over the true parameter range, in percent."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if theta_hat.shape != theta.shape:
        raise ValueError(f"shape mismatch: {theta_hat.shape} vs {theta.shape}")
    span = theta.max() - theta.min()
    if span <= 0.0:
        raise ValueError("true parameters are constant; NRMSE is undefined")
    return float(100.0 * np.sqrt(np.mean((theta_hat - theta) ** 2)) / span)


def summarize(values) -> dict:
    """Best/Mean/SD/Max of a sample (sample SD, 0 for a single value)."""
    v = np.asarray(values, dtype=float)
    return {
        "best": float(v.min()),
        "mean": float(v.mean()),
        "sd": float(v.std(ddof=1)) if v.size > 1 else 0.0,
        "max": float(v.max()),
    }


# -- suites --------------------------------------------------------------------

def load_suite(source) -> list[ScenarioSpec]:
    """Read a suite: a path to a JSON array of scenario specs or a builtin name."""
    if isinstance(source, (list, tuple)):
        entries = source
    elif str(source) in BUILTIN_SUITES and not Path(str(source)).exists():
        text = resources.files("camid.suites").joinpath(f"{source}.json").read_text()
        entries = json.loads(text)
    else:
        entries = io.read_json(source)
    if not isinstance(entries, list) or not entries:
        raise ValueError("a suite must be a non-empty JSON array of scenario specs")
    return [e if isinstance(e, ScenarioSpec) else ScenarioSpec.from_dict(e) for e in entries]


def bind_seeds(specs, master_seed: int) -> list[ScenarioSpec]:
    """Give every scenario its derived seed and the shared initial-state seed."""
    init = derive_seed(master_seed, "init")
    return [
        replace(s, seed=derive_seed(master_seed, "scenario", i), init_seed=init)
        for i, s in enumerate(specs)
    ]


def scenario_dirname(index: int, spec: ScenarioSpec) -> str:
    return f"{index:02d}-{spec.name}"


def run_seed(master_seed: int, scenario_index: int, run_index: int) -> int:
    return derive_seed(master_seed, "run", scenario_index, run_index)


# -- jobs ------------------------------------------------------------------------

@lru_cache(maxsize=4)
def _prepared(spec: ScenarioSpec, weighting: str):
    data = build_dataset(spec)
    return data, IdentificationProblem.from_dataset(data, weighting)


def _run_job(spec: ScenarioSpec, weighting: str, sade_cfg: SadeConfig, run_dir: str) -> dict:
    data, problem = _prepared(spec, weighting)
    result = run_sade(data, sade_cfg, problem)
    if np.any(np.diff(result.fitness_trace) > 0):
        raise RuntimeError("best-fitness trace increased")
    err = nrmse(result.best_theta.weights, data.truth.weights)
    payload = io.result_to_dict(result, truth=data.truth.weights, nrmse=err)
    payload["scenario"] = spec.name
    payload["weighting"] = weighting
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    io.write_json(payload, run_dir / "result.json")
    io.write_traces(result, run_dir / "traces.csv")
    return payload


def _run_job_checked(args) -> dict:
    spec, weighting, cfg, run_dir = args
    try:
        return _run_job(spec, weighting, cfg, run_dir)
    except Exception as exc:
        raise RuntimeError(f"run failed: scenario={spec.name} seed={cfg.seed} dir={run_dir}: {exc}") from exc


# -- reports -------------------------------------------------------------------

@dataclass
class SuiteReport:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def columns(self) -> list[str]:
        cols = list(REPORT_COLUMNS)
        if any("oracle_J" in row for row in self.rows):
            cols += ["oracle_J", "oracle_nrmse"]
        return cols

    def to_csv(self, path) -> None:
        cols = self.columns()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for row in self.rows:
                cells = (row.get(c) for c in cols)
                w.writerow(io.fmt(v) if isinstance(v, float) else ("" if v is None else v) for v in cells)

    def to_json(self, path) -> None:
        io.write_json({"metadata": self.metadata, "scenarios": self.rows}, path)

    @classmethod
    def from_csv(cls, path) -> SuiteReport:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls(rows=rows)


def scenario_row(spec: ScenarioSpec, results: list[dict]) -> dict:
    n = summarize([r["nrmse"] for r in results])
    j = summarize([r["fitness"] for r in results])
    row = {
        "scenario": spec.name,
        "topology": spec.topology.value,
        "radius": spec.radius,
        "K": spec.neighborhood.size(),
        "theta_scheme": spec.theta_scheme.value,
        "height": spec.height,
        "width": spec.width,
        "T": spec.T,
        "snr_db": None if spec.snr_db is None else float(spec.snr_db),
        "runs": len(results),
    }
    row.update({f"nrmse_{k}": v for k, v in n.items()})
    row.update({f"J_{k}": v for k, v in j.items()})
    row["seeds"] = [r["seed"] for r in results]
    return row


def report_from_runs(out_dir) -> SuiteReport:
    """Rebuild the report from the per-run ``result.json`` files alone."""
    out_dir = Path(out_dir)
    suite = [ScenarioSpec.from_dict(d) for d in io.read_json(out_dir / "suite.json")]
    rows = []
    for i, spec in enumerate(suite):
        run_root = out_dir / scenario_dirname(i, spec) / "runs"
        results = [io.read_json(p / "result.json") for p in sorted(run_root.iterdir())]
        rows.append(scenario_row(spec, results))
    return SuiteReport(rows=rows)


def default_threads() -> int:
    return max(1, int(os.environ.get(THREADS_ENV, "1")))


def run_suite(
    suite,
    runs: int = 20,
    out_dir="results",
    master_seed: int = 0,
    oracle: bool = False,
    threads: int | None = None,
    sade: SadeConfig | None = None,
    weighting=WeightScheme.RELATIVE,
) -> SuiteReport:
    """Run ``runs`` seeded SaDE repetitions on every scenario of ``suite``.

    Writes datasets, per-run artifacts, aggregated traces and the report
    under ``out_dir``.  Same inputs and master seed give identical files
    (apart from timestamps in ``report.json``).
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    weighting = WeightScheme(weighting).value
    base_cfg = sade or SadeConfig()
    threads = threads or default_threads()
    specs = bind_seeds(load_suite(suite), master_seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    suite_dump = [s.to_dict() for s in specs]
    io.write_json(suite_dump, out_dir / "suite.json")
    started = time.time()

    jobs = []
    for i, spec in enumerate(specs):
        sdir = out_dir / scenario_dirname(i, spec)
        io.write_dataset(build_dataset(spec), sdir / "dataset")
        for k in range(runs):
            cfg = replace(base_cfg, seed=run_seed(master_seed, i, k))
            jobs.append((spec, weighting, cfg, str(sdir / "runs" / f"run_{k:03d}")))

    log.info("running %d jobs on %d worker(s)", len(jobs), threads)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_job_checked, jobs))
    else:
        results = [_run_job_checked(job) for job in jobs]

    rows = []
    for i, spec in enumerate(specs):
        mine = results[i * runs:(i + 1) * runs]
        row = scenario_row(spec, mine)
        sdir = out_dir / scenario_dirname(i, spec)
        emit_traces(sdir / "runs", sdir / "traces")
        if oracle:
            data, problem = _prepared(spec, weighting)
            sol = solve_projected_subgradient(data, problem=problem)
            payload = io.result_to_dict(sol, truth=data.truth.weights, solver="oracle",
                                        nrmse=nrmse(sol.theta, data.truth.weights))
            payload["scenario"] = spec.name
            payload["weighting"] = weighting
            io.write_json(payload, sdir / "oracle.json")
            row["oracle_J"] = payload["fitness"]
            row["oracle_nrmse"] = payload["nrmse"]
        rows.append(row)

    config_hash = hashlib.sha256(
        json.dumps({"suite": suite_dump, "runs": runs, "master_seed": master_seed,
                    "weighting": weighting, "sade": {k: getattr(base_cfg, k) for k in base_cfg.__dataclass_fields__ if k != "seed"}},
                   sort_keys=True).encode()
    ).hexdigest()
    report = SuiteReport(
        rows=rows,
        metadata={
            "config_hash": config_hash,
            "master_seed": master_seed,
            "runs": runs,
            "weighting": weighting,
            "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.localtime(started)),
            "finished": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "elapsed_s": round(time.time() - started, 3),
        },
    )
    report.to_csv(out_dir / "report.csv")
    report.to_json(out_dir / "report.json")
    return report


# -- traces ------------------------------------------------------------------------

def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([int(row[0]), *map(io.fmt, row[1:])])


def emit_traces(run_root, out_dir) -> dict[str, Path]:
    """Aggregate the per-run ``traces.csv`` files under ``run_root``.

    Writes ``convergence.csv`` (mean/min/max best J across runs),
    ``strategy_probabilities.csv`` (mean probability per strategy) and
    ``cvr.csv`` (mean constraint-violation rate per strategy over the runs
    that used it in that generation; empty when none did).
    """
    run_root, out_dir = Path(run_root), Path(out_dir)
    files = sorted(run_root.glob("*/traces.csv"))
    if not files:
        raise FileNotFoundError(f"no traces.csv under {run_root}")
    traces = [io.read_traces(f) for f in files]
    n_gen = min(len(t["generation"]) for t in traces)
    J = np.stack([t["best_J"][:n_gen] for t in traces])
    names = io.TRACE_COLUMNS[2:6]
    P = np.stack([np.stack([t[c][:n_gen] for c in names], axis=1) for t in traces])
    C = np.stack([np.stack([t["cvr" + c[1:]][:n_gen] for c in names], axis=1) for t in traces])
    gens = np.arange(n_gen)
    labels = [s.label for s in Strategy]

    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "convergence": out_dir / "convergence.csv",
        "strategy_probabilities": out_dir / "strategy_probabilities.csv",
        "cvr": out_dir / "cvr.csv",
    }
    _write_rows(paths["convergence"], ["generation", "mean_best_J", "min_best_J", "max_best_J"],
                zip(gens, J.mean(0), J.min(0), J.max(0)))
    _write_rows(paths["strategy_probabilities"], ["generation", *labels],
                (np.r_[g, row] for g, row in zip(gens, P.mean(0))))
    counts = np.sum(~np.isnan(C), axis=0)
    sums = np.nansum(C, axis=0)
    cvr = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    _write_rows(paths["cvr"], ["generation", *labels], (np.r_[g, row] for g, row in zip(gens, cvr)))
    return paths
