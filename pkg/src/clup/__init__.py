"""Iterative MIMO ML detection by controlled loosening-up, with a
first-iteration performance predictor and a Monte Carlo harness."""

__version__ = "0.1.0"

from .model import ProblemInstance, generate_instance, random_sign_vector, snr_db_to_sigma
from .solvers import (
    Gram,
    InfeasibleRadiusError,
    SolveStatus,
    SolverSettings,
    SubproblemResult,
    solve_box_ls,
    solve_clup_step,
    spectral_norm_sq,
)
from .engine import (
    ClupConfig,
    DegenerateIterateError,
    Iterate,
    SolverIterLimitError,
    StopReason,
    Trajectory,
    Variant,
    init_polytope,
    init_random,
    run,
)
from .metrics import (
    AggregateStats,
    IterationRecord,
    IterationStats,
    aggregate,
    bit_error_rate,
    record_iteration,
)
from .theory import BracketingError, TheoryFirstIter, integrals_I, solve_first_iteration, xi_rd1
from .harness import (
    CellResult,
    ExperimentSpec,
    derive_trial_seed,
    emit_outputs,
    run_experiment,
)

__all__ = [
    "AggregateStats",
    "BracketingError",
    "CellResult",
    "ClupConfig",
    "DegenerateIterateError",
    "ExperimentSpec",
    "Gram",
    "InfeasibleRadiusError",
    "Iterate",
    "IterationRecord",
    "IterationStats",
    "ProblemInstance",
    "SolveStatus",
    "SolverIterLimitError",
    "SolverSettings",
    "StopReason",
    "SubproblemResult",
    "TheoryFirstIter",
    "Trajectory",
    "Variant",
    "aggregate",
    "bit_error_rate",
    "derive_trial_seed",
    "emit_outputs",
    "generate_instance",
    "init_polytope",
    "init_random",
    "integrals_I",
    "random_sign_vector",
    "record_iteration",
    "run",
    "run_experiment",
    "snr_db_to_sigma",
    "solve_box_ls",
    "solve_clup_step",
    "solve_first_iteration",
    "spectral_norm_sq",
    "xi_rd1",
    "__version__",
]
