"""Command-line front end.

Subcommands: `run` (Monte Carlo grids), `theory` (first-iteration predictor),
`oracle-check` (solver-vs-oracle certification on small instances). Exit
codes: 0 success, 2 configuration error, 3 trial failure rate above 1%
(oracle-check returns 1 when a gate fails).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import ExperimentSpec, emit_outputs, failure_rate, run_experiment
from .model import snr_db_to_sigma
from .theory import solve_first_iteration

EXIT_OK = 0
EXIT_ORACLE_FAIL = 1
EXIT_CONFIG = 2
EXIT_FAILURE_RATE = 3

# flag name -> (parser, repeatable) for config-file merging
_RUN_KEYS = {
    "n": (int, False),
    "alpha": (float, False),
    "snr-db": (float, True),
    "r-sc": (float, False),
    "variant": (str, True),
    "trials": (int, False),
    "max-iters": (int, False),
    "seed": (int, False),
    "out": (str, False),
    "emit": (str, False),
    "workers": (int, False),
}

_RUN_DEFAULTS = {
    "n": 800,
    "alpha": 0.8,
    "snr-db": [13.0],
    "r-sc": 1.3,
    "variant": ["clup-plt"],
    "trials": 50,
    "max-iters": 5,
    "seed": 0,
    "out": "out",
    "emit": "csv,json,table",
    "workers": 1,
}


class ConfigError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clup", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a Monte Carlo experiment grid")
    run_p.add_argument("--config", type=Path, help="flat key=value file; flags override it")
    run_p.add_argument("--n", type=int)
    run_p.add_argument("--alpha", type=float)
    run_p.add_argument("--snr-db", type=float, action="append")
    run_p.add_argument("--r-sc", type=float)
    run_p.add_argument("--variant", choices=["clup", "clup-plt"], action="append")
    run_p.add_argument("--trials", type=int)
    run_p.add_argument("--max-iters", type=int)
    run_p.add_argument("--seed", type=int)
    run_p.add_argument("--out", type=str)
    run_p.add_argument("--emit", type=str, help="comma-separated subset of csv,json,table")
    run_p.add_argument("--workers", type=int)

    theory_p = sub.add_parser("theory", help="print the first-iteration predictor")
    theory_p.add_argument("--alpha", type=float, required=True)
    theory_p.add_argument("--snr-db", type=float, required=True)

    oracle_p = sub.add_parser("oracle-check", help="run the solver-vs-oracle suite")
    oracle_p.add_argument("--cases", type=int, default=100)
    oracle_p.add_argument("--seed", type=int, default=0x0C5EED)
    return parser


def _load_config(path: Path) -> dict[str, object]:
    values: dict[str, object] = {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _RUN_KEYS:
            raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
        cast, repeatable = _RUN_KEYS[key]
        try:
            if repeatable:
                values[key] = [cast(item.strip()) for item in value.split(",") if item.strip()]
            else:
                values[key] = cast(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{line_no}: bad value for {key}: {value!r}") from exc
    return values


def _merge_run_options(args: argparse.Namespace) -> dict[str, object]:
    merged = dict(_RUN_DEFAULTS)
    if args.config is not None:
        merged.update(_load_config(args.config))
    overrides = {
        "n": args.n,
        "alpha": args.alpha,
        "snr-db": args.snr_db,
        "r-sc": args.r_sc,
        "variant": args.variant,
        "trials": args.trials,
        "max-iters": args.max_iters,
        "seed": args.seed,
        "out": args.out,
        "emit": args.emit,
        "workers": args.workers,
    }
    merged.update({key: value for key, value in overrides.items() if value is not None})
    return merged


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        opts = _merge_run_options(args)
        spec = ExperimentSpec(
            n=opts["n"],
            alpha=opts["alpha"],
            snr_db_list=list(opts["snr-db"]),
            r_sc=opts["r-sc"],
            variants=list(opts["variant"]),
            trials=opts["trials"],
            max_iters=opts["max-iters"],
            master_seed=opts["seed"],
            output_dir=Path(opts["out"]),
            emit=frozenset(s.strip() for s in str(opts["emit"]).split(",") if s.strip()),
            workers=opts["workers"],
        )
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    cells = run_experiment(spec)
    for path in emit_outputs(cells, spec):
        print(f"wrote {path}")
    rate = failure_rate(cells, spec)
    failed = sum(len(cell.failures) for cell in cells)
    print(f"cells={len(cells)} trials_per_cell={spec.trials} failed_trials={failed}")
    if rate > 0.01:
        print(f"failure rate {rate:.2%} exceeds 1%", file=sys.stderr)
        return EXIT_FAILURE_RATE
    return EXIT_OK


def _cmd_theory(args: argparse.Namespace) -> int:
    try:
        sigma = snr_db_to_sigma(args.snr_db)
        result = solve_first_iteration(args.alpha, sigma)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"alpha = {result.alpha!r}")
    print(f"snr_db = {args.snr_db!r}")
    print(f"sigma = {result.sigma!r}")
    print(f"gamma_hat = {result.gamma_hat!r}")
    print(f"c1z_hat = {result.c1z_hat!r}")
    print(f"xi = {result.xi!r}")
    print(f"nu_hat = {result.nu_hat!r}")
    print(f"s1_hat = {result.s1_hat!r}")
    print(f"p_err1 = {result.p_err1!r}")
    print(f"e_z = {result.e_z!r}")
    print(f"e_zsq = {result.e_zsq!r}")
    print(f"d1_pred = {result.d1_pred!r}")
    print(f"d2_pred = {result.d2_pred!r}")
    return EXIT_OK


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    from .oracles import run_oracle_suite

    if args.cases < 1:
        print("config error: --cases must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    report = run_oracle_suite(cases=args.cases, seed=args.seed)
    print(f"cases = {report.cases}")
    print(f"max_box_objective_gap = {report.max_box_gap:.3e}")
    print(f"max_step_objective_gap = {report.max_clup_gap:.3e}")
    print(f"max_kkt_residual = {report.max_kkt:.3e}")
    for failure in report.failures:
        print(f"FAIL {failure}")
    print("oracle-check: PASS" if report.ok else "oracle-check: FAIL")
    return EXIT_OK if report.ok else EXIT_ORACLE_FAIL


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "theory":
        return _cmd_theory(args)
    return _cmd_oracle_check(args)


if __name__ == "__main__":
    raise SystemExit(main())
