"""Command line interface.

    camid suite run SUITE [--runs 20] [--out DIR] [--master-seed N] [--oracle] [--threads N]
    camid scenario gen SUITE [--out DIR] [--master-seed N]
    camid traces emit SCENARIO_DIR [--out DIR]
    camid report show DIR

``SUITE`` is a JSON file or one of the builtin suites ``standard``, ``desk``, ``ci``.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import io
from .experiment import (
    THREADS_ENV,
    SuiteReport,
    bind_seeds,
    default_threads,
    emit_traces,
    load_suite,
    run_suite,
    scenario_dirname,
)
from .lattice import WeightScheme
from .sade import SadeConfig
from .scenario import build_dataset


def _suite_run(args) -> int:
    cfg = SadeConfig()
    overrides = {k: v for k, v in (("NP", args.pop_size), ("G_max", args.generations)) if v is not None}
    cfg = replace(cfg, **overrides)
    report = run_suite(
        args.suite,
        runs=args.runs,
        out_dir=args.out,
        master_seed=args.master_seed,
        oracle=args.oracle,
        threads=args.threads,
        sade=cfg,
        weighting=args.weighting,
    )
    _print_report(report.rows)
    print(f"wrote {Path(args.out) / 'report.csv'}")
    return 0


def _scenario_gen(args) -> int:
    specs = bind_seeds(load_suite(args.suite), args.master_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_json([s.to_dict() for s in specs], out / "suite.json")
    for i, spec in enumerate(specs):
        path = io.write_dataset(build_dataset(spec), out / scenario_dirname(i, spec) / "dataset")
        print(path)
    return 0


def _traces_emit(args) -> int:
    root = Path(args.scenario_dir)
    run_root = root / "runs" if (root / "runs").is_dir() else root
    out = Path(args.out) if args.out else root / "traces"
    for path in emit_traces(run_root, out).values():
        print(path)
    return 0


def _print_report(rows) -> None:
    cols = ["scenario", "K", "runs", "nrmse_best", "nrmse_mean", "nrmse_sd", "nrmse_max", "J_best", "J_mean"]
    table = [
        [f"{float(r[c]):.4g}" if c.startswith(("nrmse_", "J_")) else str(r[c]) for c in cols]
        for r in rows
    ]
    widths = [max(len(c), *(len(row[j]) for row in table)) for j, c in enumerate(cols)]
    print("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
    for row in table:
        print("  ".join(v.ljust(w) for v, w in zip(row, widths)))


def _report_show(args) -> int:
    path = Path(args.dir)
    if path.is_dir():
        path = path / "report.csv"
    _print_report(SuiteReport.from_csv(path).rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="camid", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="group", required=True)

    suite = sub.add_parser("suite").add_subparsers(dest="cmd", required=True)
    p = suite.add_parser("run", help="run SaDE repetitions over a scenario suite")
    p.add_argument("suite")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--out", default="results")
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--oracle", action="store_true", help="also solve each scenario with the convex oracle")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker processes (default ${THREADS_ENV} or {default_threads()})")
    p.add_argument("--weighting", choices=[w.value for w in WeightScheme], default=WeightScheme.RELATIVE.value)
    p.add_argument("--generations", type=int, default=None, help="override G_max")
    p.add_argument("--pop-size", type=int, default=None, help="override NP")
    p.set_defaults(func=_suite_run)

    scen = sub.add_parser("scenario").add_subparsers(dest="cmd", required=True)
    p = scen.add_parser("gen", help="write dataset archives for a suite")
    p.add_argument("suite")
    p.add_argument("--out", default="datasets")
    p.add_argument("--master-seed", type=int, default=0)
    p.set_defaults(func=_scenario_gen)

    traces = sub.add_parser("traces").add_subparsers(dest="cmd", required=True)
    p = traces.add_parser("emit", help="aggregate per-run traces of one scenario")
    p.add_argument("scenario_dir")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_traces_emit)

    report = sub.add_parser("report").add_subparsers(dest="cmd", required=True)
    p = report.add_parser("show", help="print a suite report")
    p.add_argument("dir")
    p.set_defaults(func=_report_show)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"camid: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
