"""Outer iterations of the detector, for both start variants.

Each step maximizes alignment with the previous normalized iterate inside
(residual ball of radius r) ∩ hypercube, then normalizes. The radius is tied
to the per-instance relaxation optimum: r = r_sc * r_plt.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .metrics import IterationRecord, record_iteration
from .model import ProblemInstance, random_sign_vector
from .solvers import (
    Gram,
    SolveStatus,
    SolverSettings,
    SubproblemResult,
    solve_box_ls,
    solve_clup_step,
)


class Variant(str, enum.Enum):
    RANDOM_START = "clup"
    POLYTOPE_START = "clup-plt"


class StopReason(enum.Enum):
    BUDGET = "budget"
    EARLY_STOP = "early_stop"


class DegenerateIterateError(RuntimeError):
    """An iterate collapsed to the zero vector (signals y ~ 0)."""


class SolverIterLimitError(RuntimeError):
    """A subproblem exhausted its iteration caps before certifying optimality."""


@dataclass
class ClupConfig:
    """Algorithm variant plus radius scale, budget and solver tolerances."""

    variant: Variant = Variant.POLYTOPE_START
    r_sc: float = 1.3
    max_iters: int = 5
    early_stop_tol: float = 1e-4
    solver: SolverSettings = field(default_factory=SolverSettings)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.r_sc <= 0.0:
            raise ValueError(f"r_sc must be positive, got {self.r_sc}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.early_stop_tol < 0.0:
            raise ValueError("early_stop_tol must be nonnegative")


@dataclass
class Iterate:
    """One outer iterate: un-normalized solution, its normalization, and error."""

    k: int
    x_s: np.ndarray
    x: np.ndarray
    z: np.ndarray
    residual_norm: float


@dataclass
class Trajectory:
    r_plt: float
    r: float
    iterates: list[Iterate]
    records: list[IterationRecord]
    stop_reason: StopReason


def _make_iterate(k: int, x_s: np.ndarray, instance: ProblemInstance, residual_norm: float) -> Iterate:
    norm = float(np.linalg.norm(x_s))
    if norm == 0.0:
        raise DegenerateIterateError(f"iterate {k} has zero norm")
    return Iterate(k=k, x_s=x_s, x=x_s / norm, z=instance.x_sol - x_s, residual_norm=residual_norm)


def _require_converged(result: SubproblemResult, what: str) -> SubproblemResult:
    if result.status is not SolveStatus.CONVERGED:
        raise SolverIterLimitError(f"{what} hit its iteration cap (kkt={result.kkt_residual:.3e})")
    return result


def init_polytope(instance: ProblemInstance, cfg: ClupConfig, gram: Gram | None = None) -> Iterate:
    """Relaxation start: box least squares becomes iterate k = 1.

    The iterate's residual_norm is the per-instance relaxation optimum r_plt.
    """
    relax = _require_converged(
        solve_box_ls(instance.A, instance.y, cfg.solver, gram=gram), "box least squares"
    )
    return _make_iterate(1, relax.x, instance, relax.residual_norm)


def init_random(instance: ProblemInstance, cfg: ClupConfig) -> Iterate:
    """Random start: uniform sign vector, carried as iterate k = 0.

    Its x is the objective direction of the first real step; it is not part
    of the recorded trajectory.
    """
    x0 = random_sign_vector(instance.n, cfg.seed)
    residual = float(np.linalg.norm(instance.y - instance.A @ x0))
    return _make_iterate(0, x0, instance, residual)


def run(instance: ProblemInstance, cfg: ClupConfig) -> Trajectory:
    """Run one trajectory: relaxation (for r_plt), then the loosened steps.

    Both variants solve the relaxation to fix r = r_sc * r_plt; the random
    variant discards its solution vector. Early stopping compares consecutive
    overlaps s_hat when early_stop_tol > 0.
    """
    gram = Gram.from_system(instance.A, instance.y)
    relax = _require_converged(
        solve_box_ls(instance.A, instance.y, cfg.solver, gram=gram), "box least squares"
    )
    r_plt = relax.residual_norm
    r = cfg.r_sc * r_plt

    iterates: list[Iterate] = []
    records: list[IterationRecord] = []
    x0_direction: np.ndarray | None = None
    if cfg.variant is Variant.POLYTOPE_START:
        first = _make_iterate(1, relax.x, instance, r_plt)
        iterates.append(first)
        records.append(record_iteration(iterates, 1, instance.sigma))
        direction = first.x
        next_k = 2
    else:
        carrier = init_random(instance, cfg)
        direction = carrier.x
        x0_direction = carrier.x
        next_k = 1

    stop_reason = StopReason.BUDGET
    x_warm: np.ndarray | None = None
    lam: float | None = None
    for k in range(next_k, cfg.max_iters + 1):
        step = _require_converged(
            solve_clup_step(
                instance.A,
                instance.y,
                direction,
                r,
                cfg.solver,
                gram=gram,
                x_warm=x_warm,
                lam_hint=lam,
                r_min=r_plt,
            ),
            f"loosened step {k}",
        )
        iterate = _make_iterate(k, step.x, instance, step.residual_norm)
        iterates.append(iterate)
        records.append(
            record_iteration(iterates, k, instance.sigma, x0_direction=x0_direction)
        )
        direction = iterate.x
        x_warm, lam = step.x, step.lam
        if (
            cfg.early_stop_tol > 0.0
            and len(records) >= 2
            and abs(records[-1].s_hat - records[-2].s_hat) < cfg.early_stop_tol
        ):
            stop_reason = StopReason.EARLY_STOP
            break
    return Trajectory(
        r_plt=r_plt, r=r, iterates=iterates, records=records, stop_reason=stop_reason
    )
