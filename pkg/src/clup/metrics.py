"""Per-iteration scalar summaries and cross-iteration correlation bookkeeping.

All quantities are measured on the un-normalized iterates x^(k,s) and the
error vectors z^(k) = x_sol - x^(k,s). The correlation entries
    q_{k,j} = (s3 + sigma^2 - s2_j) / sqrt((c2z_k + sigma^2)(c2z_j + sigma^2))
reduce to a normalized inner product of (z^(k), sigma) and (z^(j), sigma),
so |q| <= 1 holds per trial by Cauchy-Schwarz.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .engine import Iterate

SCALAR_FIELDS = ("p_err", "s_hat", "d1", "d2", "s3", "c2z")


def bit_error_rate(x_s: np.ndarray, x_sol: np.ndarray) -> float:
    """Fraction of coordinates whose sign disagrees with the all-positive truth.

    sign(0) counts as an error.
    """
    if x_s.shape != x_sol.shape:
        raise ValueError(f"length mismatch: {x_s.shape} vs {x_sol.shape}")
    if np.any(x_sol <= 0.0):
        raise ValueError("x_sol must be the all-positive input vector")
    return float(np.count_nonzero(x_s <= 0.0)) / x_s.shape[0]


@dataclass
class IterationRecord:
    """Scalar summaries of iterate k plus its correlation row against 1..k-1."""

    k: int
    p_err: float
    s_hat: float
    d1: float
    d2: float
    s3: float
    c2z: float
    s2: np.ndarray
    q_row: np.ndarray


def record_iteration(
    iterates: Sequence["Iterate"],
    k: int,
    sigma: float,
    x0_direction: np.ndarray | None = None,
) -> IterationRecord:
    """Summarize iterate k of a trajectory prefix.

    iterates holds the 1-based iterates 1..k (at least). For k = 1 the
    previous-direction overlap s_hat is 0 unless x0_direction supplies the
    random start used as the first objective direction.
    """
    if not 1 <= k <= len(iterates):
        raise ValueError(f"iterate {k} not available (have {len(iterates)})")
    cur = iterates[k - 1]
    if cur.k != k:
        raise ValueError(f"iterates out of order: slot {k} holds k={cur.k}")
    x_s, z = cur.x_s, cur.z
    x_sol = x_s + z
    d1 = float(x_sol @ x_s)
    d2 = float(x_s @ x_s)
    s3 = 1.0 - d1
    c2z = d2 - 2.0 * d1 + 1.0
    if k == 1:
        s_hat = float(x0_direction @ x_s) if x0_direction is not None else 0.0
    else:
        s_hat = float(iterates[k - 2].x @ x_s)

    sig_sq = sigma * sigma
    s2 = np.array([float(iterates[j].x_s @ z) for j in range(k - 1)])
    c2z_prior = np.array([float(iterates[j].z @ iterates[j].z) for j in range(k - 1)])
    q_row = (s3 + sig_sq - s2) / np.sqrt((c2z + sig_sq) * (c2z_prior + sig_sq))
    return IterationRecord(
        k=k,
        p_err=bit_error_rate(x_s, x_sol),
        s_hat=s_hat,
        d1=d1,
        d2=d2,
        s3=s3,
        c2z=c2z,
        s2=s2,
        q_row=q_row,
    )


@dataclass
class IterationStats:
    """Mean and standard error of each recorded scalar at one iteration index."""

    k: int
    mean: dict[str, float]
    se: dict[str, float]


@dataclass
class AggregateStats:
    per_iteration: list[IterationStats]
    q_matrix: np.ndarray
    trials: int


def aggregate(per_trial_records: Sequence[Sequence[IterationRecord]]) -> AggregateStats:
    """Average per-trial records into per-iteration means/standard errors.

    All trials must share the same iteration count and indexing. p_err is
    pooled over all n*trials bits, which for equal n equals the trial mean.
    The correlation matrix is averaged entrywise with unit diagonal.
    """
    if len(per_trial_records) == 0:
        raise ValueError("no trials to aggregate")
    n_iters = len(per_trial_records[0])
    if n_iters == 0:
        raise ValueError("trials contain no iterations")
    for recs in per_trial_records:
        if len(recs) != n_iters:
            raise ValueError("all trials must share the same iteration count")
        if [r.k for r in recs] != list(range(1, n_iters + 1)):
            raise ValueError("records must be indexed 1..K")

    trials = len(per_trial_records)
    per_iteration = []
    for i in range(n_iters):
        mean: dict[str, float] = {}
        se: dict[str, float] = {}
        for name in SCALAR_FIELDS:
            vals = np.array([getattr(recs[i], name) for recs in per_trial_records])
            mean[name] = float(np.mean(vals))
            se[name] = float(np.std(vals, ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
        per_iteration.append(IterationStats(k=i + 1, mean=mean, se=se))

    q = np.eye(n_iters)
    for i in range(1, n_iters):
        for j in range(i):
            entry = float(np.mean([recs[i].q_row[j] for recs in per_trial_records]))
            q[i, j] = entry
            q[j, i] = entry
    return AggregateStats(per_iteration=per_iteration, q_matrix=q, trials=trials)
