"""Experiment orchestration: deterministic seeding, worker pool, file emission.

Per-trial seeds come from a SplitMix64 chain over (master_seed, variant,
snr_db, trial index), so results are independent of worker count and
scheduling; trials are reduced in (cell, trial) order.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .engine import (
    ClupConfig,
    DegenerateIterateError,
    SolverIterLimitError,
    Variant,
    run,
)
from .metrics import SCALAR_FIELDS, AggregateStats, IterationRecord, aggregate
from .model import generate_instance, snr_db_to_sigma
from .solvers import InfeasibleRadiusError, SolverSettings
from .theory import TheoryFirstIter, solve_first_iteration

_MASK64 = (1 << 64) - 1

_TRIAL_ERRORS = (InfeasibleRadiusError, SolverIterLimitError, DegenerateIterateError)


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_trial_seed(master_seed: int, variant: Variant, snr_db: float, trial: int) -> int:
    """Stable 64-bit seed for one (variant, snr_db, trial) cell entry."""
    label = variant.value.encode("ascii")[:8].ljust(8, b"\0")
    tokens = (
        int.from_bytes(label, "little"),
        int(round(snr_db * 1e6)) & _MASK64,
        trial & _MASK64,
    )
    seed = master_seed & _MASK64
    for token in tokens:
        seed = _splitmix64(seed ^ token)
    return seed


@dataclass
class ExperimentSpec:
    """One experiment grid: (variant, snr_db) cells sharing n, alpha, r_sc."""

    n: int = 800
    alpha: float = 0.8
    snr_db_list: list[float] = field(default_factory=lambda: [13.0])
    r_sc: float = 1.3
    variants: list[Variant] = field(default_factory=lambda: [Variant.POLYTOPE_START])
    trials: int = 50
    max_iters: int = 5
    master_seed: int = 0
    output_dir: Path = Path("out")
    emit: frozenset[str] = frozenset({"csv", "json", "table"})
    workers: int = 1

    def __post_init__(self) -> None:
        self.output_dir = Path(self.output_dir)
        self.emit = frozenset(self.emit)
        self.variants = [Variant(v) for v in self.variants]
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.snr_db_list:
            raise ValueError("snr_db_list must be nonempty")
        if not self.variants:
            raise ValueError("variants must be nonempty")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        unknown = self.emit - {"csv", "json", "table"}
        if unknown:
            raise ValueError(f"unknown emit formats: {sorted(unknown)}")


@dataclass
class CellResult:
    """Aggregated outcome of one (variant, snr_db) grid cell."""

    variant: Variant
    snr_db: float
    sigma: float
    stats: AggregateStats
    theory: TheoryFirstIter
    trial_records: list[tuple[int, list[IterationRecord]]]
    failures: list[tuple[int, str]]


def _run_one_trial(args: tuple) -> tuple[int, list[IterationRecord] | None, str | None]:
    """Worker entry: returns (trial, records, error). Module-level for pickling."""
    n, alpha, sigma, r_sc, max_iters, variant_value, trial, seed = args
    cfg = ClupConfig(
        variant=Variant(variant_value),
        r_sc=r_sc,
        max_iters=max_iters,
        early_stop_tol=0.0,  # tables need every trial to run the full budget
        solver=SolverSettings(),
        seed=seed,
    )
    try:
        instance = generate_instance(n, alpha, sigma, seed)
        trajectory = run(instance, cfg)
    except _TRIAL_ERRORS as exc:
        return trial, None, f"{type(exc).__name__}: {exc}"
    return trial, trajectory.records, None


def run_experiment(spec: ExperimentSpec) -> list[CellResult]:
    """Run every grid cell; aggregate per cell and attach the first-iteration theory."""
    cells = [(variant, snr_db) for variant in spec.variants for snr_db in spec.snr_db_list]
    jobs = []
    for variant, snr_db in cells:
        sigma = snr_db_to_sigma(snr_db)
        for trial in range(spec.trials):
            seed = derive_trial_seed(spec.master_seed, variant, snr_db, trial)
            jobs.append(
                (spec.n, spec.alpha, sigma, spec.r_sc, spec.max_iters, variant.value, trial, seed)
            )

    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            outcomes = list(pool.map(_run_one_trial, jobs, chunksize=1))
    else:
        outcomes = [_run_one_trial(job) for job in jobs]

    results = []
    per_cell = spec.trials
    for i, (variant, snr_db) in enumerate(cells):
        chunk = sorted(outcomes[i * per_cell : (i + 1) * per_cell], key=lambda o: o[0])
        ok = [(trial, recs) for trial, recs, err in chunk if err is None]
        failures = [(trial, err) for trial, _, err in chunk if err is not None]
        if not ok:
            raise RuntimeError(
                f"every trial failed in cell ({variant.value}, {snr_db} dB): {failures}"
            )
        sigma = snr_db_to_sigma(snr_db)
        results.append(
            CellResult(
                variant=variant,
                snr_db=snr_db,
                sigma=sigma,
                stats=aggregate([recs for _, recs in ok]),
                theory=solve_first_iteration(spec.alpha, sigma),
                trial_records=ok,
                failures=failures,
            )
        )
    return results


def failure_rate(cells: list[CellResult], spec: ExperimentSpec) -> float:
    total = spec.trials * len(cells)
    failed = sum(len(cell.failures) for cell in cells)
    return failed / total


def _q_pairs(max_k: int) -> list[tuple[int, int]]:
    return [(k, j) for k in range(2, max_k + 1) for j in range(1, k)]


def _write_csv(path: Path, cells: list[CellResult], spec: ExperimentSpec) -> None:
    pairs = _q_pairs(spec.max_iters)
    header = ["variant", "snr_db", "alpha", "n", "r_sc", "trial", "iter"]
    header += list(SCALAR_FIELDS)
    header += [f"q_{k}_{j}" for k, j in pairs]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for cell in cells:
            for trial, records in cell.trial_records:
                for rec in records:
                    row = [
                        cell.variant.value,
                        repr(cell.snr_db),
                        repr(spec.alpha),
                        spec.n,
                        repr(spec.r_sc),
                        trial,
                        rec.k,
                    ]
                    row += [repr(getattr(rec, name)) for name in SCALAR_FIELDS]
                    for k, j in pairs:
                        row.append(repr(float(rec.q_row[j - 1])) if k == rec.k else "")
                    writer.writerow(row)


def _theory_dict(theory: TheoryFirstIter) -> dict:
    return {
        "alpha": theory.alpha,
        "sigma": theory.sigma,
        "gamma_hat": theory.gamma_hat,
        "c1z_hat": theory.c1z_hat,
        "xi": theory.xi,
        "nu_hat": theory.nu_hat,
        "s1_hat": theory.s1_hat,
        "p_err1": theory.p_err1,
        "e_z": theory.e_z,
        "e_zsq": theory.e_zsq,
        "d1_pred": theory.d1_pred,
        "d2_pred": theory.d2_pred,
    }


def _json_payload(cells: list[CellResult], spec: ExperimentSpec) -> dict:
    # the config echo covers only experiment-defining keys: operational ones
    # (output_dir, emit, workers) must not break byte-identity across runs
    return {
        "tool": {"name": "clup", "version": __version__},
        "config": {
            "n": spec.n,
            "alpha": spec.alpha,
            "snr_db_list": spec.snr_db_list,
            "r_sc": spec.r_sc,
            "variants": [v.value for v in spec.variants],
            "trials": spec.trials,
            "max_iters": spec.max_iters,
            "master_seed": spec.master_seed,
        },
        "cells": [
            {
                "variant": cell.variant.value,
                "snr_db": cell.snr_db,
                "sigma": cell.sigma,
                "trials": cell.stats.trials,
                "failures": [[trial, msg] for trial, msg in cell.failures],
                "per_iteration": [
                    {
                        "k": stats.k,
                        **{
                            name: {"mean": stats.mean[name], "se": stats.se[name]}
                            for name in SCALAR_FIELDS
                        },
                    }
                    for stats in cell.stats.per_iteration
                ],
                "q_matrix": cell.stats.q_matrix.tolist(),
                "theory_first_iteration": _theory_dict(cell.theory),
            }
            for cell in cells
        ],
    }


def render_json(cells: list[CellResult], spec: ExperimentSpec) -> str:
    """Canonical JSON text: parse-and-re-emit is byte-identical."""
    return json.dumps(_json_payload(cells, spec), sort_keys=True, indent=2) + "\n"


def render_table(cell: CellResult, spec: ExperimentSpec) -> str:
    """Aligned per-iteration table, overlap printed as the positive -s_hat."""
    lines = [
        f"# {cell.variant.value} | snr_db={cell.snr_db:g} | alpha={spec.alpha:g} "
        f"| r_sc={spec.r_sc:g} | n={spec.n} | trials={cell.stats.trials} "
        f"| failures={len(cell.failures)}"
    ]
    lines.append(f"{'k':>3} {'p_err':>10} {'-s_hat':>10} {'d2':>10} {'d1':>10}")
    for stats in cell.stats.per_iteration:
        lines.append(
            f"{stats.k:>3} {stats.mean['p_err']:>10.5f} {stats.mean['s_hat']:>10.4f} "
            f"{stats.mean['d2']:>10.4f} {stats.mean['d1']:>10.4f}"
        )
    t = cell.theory
    lines.append(
        f"theory k=1 (n->inf): p_err {t.p_err1:.5f}  -s_hat {0.0:.4f}  "
        f"d2 {t.d2_pred:.4f}  d1 {t.d1_pred:.4f}  "
        f"[gamma {t.gamma_hat:.4f}, c1z {t.c1z_hat:.4f}, xi {t.xi:.4f}]"
    )
    return "\n".join(lines) + "\n"


def emit_outputs(cells: list[CellResult], spec: ExperimentSpec) -> list[Path]:
    """Write the requested artifacts under spec.output_dir; returns the paths."""
    spec.output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in spec.emit:
        path = spec.output_dir / "results.csv"
        _write_csv(path, cells, spec)
        written.append(path)
    if "json" in spec.emit:
        path = spec.output_dir / "summary.json"
        path.write_text(render_json(cells, spec))
        written.append(path)
    if "table" in spec.emit:
        path = spec.output_dir / "tables.txt"
        path.write_text("\n".join(render_table(cell, spec) for cell in cells))
        written.append(path)
    return written
