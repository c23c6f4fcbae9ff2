"""Slow-but-sure reference solvers used to certify the production ones.

Box least squares is solved by exhaustive active-set enumeration: every
{lower, free, upper}^n face pattern is reduced to an unconstrained least
squares on its free coordinates and kept only if its optimal set intersects
the box. The ball-constrained linear step is solved by a golden-section scan
of the concave dual over the ball multiplier, with its own projected-gradient
inner loop. Neither shares code with the production solvers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .harness import _splitmix64
from .model import generate_instance, philox_generator
from .solvers import SolverSettings, solve_box_ls, solve_clup_step

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def box_ls_active_set(A: np.ndarray, y: np.ndarray, feas_tol: float = 1e-9) -> tuple[float, np.ndarray]:
    """Global optimum of min ||y - A x|| over the hypercube by enumeration.

    Intended for n <= ~8. For rank-deficient face patterns the attaining set
    of the reduced least squares is an affine subspace; its intersection with
    the box is checked exactly with a small LP instead of only testing the
    minimum-norm point.
    """
    m, n = A.shape
    hw = 1.0 / math.sqrt(n)
    best_val = math.inf
    best_x = None
    for pattern in itertools.product((-1, 0, 1), repeat=n):
        fixed = np.array(pattern) != 0
        x = np.array(pattern, dtype=float) * hw
        rhs = y - A[:, fixed] @ x[fixed] if fixed.any() else y.copy()
        free = ~fixed
        if not free.any():
            val = float(np.linalg.norm(rhs))
            if val < best_val:
                best_val, best_x = val, x
            continue
        A_free = A[:, free]
        sol, _, rank, _ = np.linalg.lstsq(A_free, rhs, rcond=None)
        candidate = None
        if rank == A_free.shape[1]:
            if np.all(np.abs(sol) <= hw + feas_tol):
                candidate = np.clip(sol, -hw, hw)
        else:
            candidate = _feasible_attaining_point(A_free, sol, hw, feas_tol)
        if candidate is None:
            continue
        x[free] = candidate
        val = float(np.linalg.norm(y - A @ x))
        if val < best_val:
            best_val, best_x = val, x
    return best_val, best_x


def _feasible_attaining_point(
    A_free: np.ndarray, x_mn: np.ndarray, hw: float, feas_tol: float
) -> np.ndarray | None:
    """A box point in {x_mn + null(A_free) t}, or None if the set misses the box."""
    if np.all(np.abs(x_mn) <= hw + feas_tol):
        return np.clip(x_mn, -hw, hw)
    _, s, vt = np.linalg.svd(A_free)
    cutoff = max(A_free.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    null_basis = vt[np.sum(s > cutoff):].T
    if null_basis.shape[1] == 0:
        return None
    from scipy.optimize import linprog

    k = null_basis.shape[1]
    res = linprog(
        c=np.zeros(k),
        A_ub=np.vstack([null_basis, -null_basis]),
        b_ub=np.concatenate([hw + feas_tol - x_mn, hw + feas_tol + x_mn]),
        bounds=[(None, None)] * k,
        method="highs",
    )
    if not res.success:
        return None
    return np.clip(x_mn + null_basis @ res.x, -hw, hw)


def _project_box(x: np.ndarray, hw: float) -> np.ndarray:
    return np.clip(x, -hw, hw)


def _dual_inner(
    G: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    lam: float,
    L: float,
    hw: float,
    x0: np.ndarray,
    max_iters: int,
) -> np.ndarray:
    """Minimize -c^T x + lam ||y - A x||^2 over the box, to a near-machine fixpoint."""
    x = x0.copy()
    step = 1.0 / (2.0 * lam * L)
    for _ in range(max_iters):
        grad = 2.0 * lam * (G @ x - b) - c
        x_next = _project_box(x - step * grad, hw)
        if np.max(np.abs(x_next - x)) <= 1e-14:
            return x_next
        x = x_next
    return x


def clup_dual_scan(
    A: np.ndarray,
    y: np.ndarray,
    c: np.ndarray,
    r: float,
    lam_max: float = 1e6,
    inner_iters: int = 10**6,
) -> tuple[float, np.ndarray, float]:
    """min -c^T x over ball-and-box via a golden-section scan of the dual.

    Returns (optimal value, primal point, multiplier). The dual
    d(lam) = min_x [-c^T x + lam(||y - A x||^2 - r^2)] is concave in lam, and
    strong duality holds, so its scan value equals the primal optimum.
    """
    m, n = A.shape
    hw = 1.0 / math.sqrt(n)
    corner = np.where(c >= 0.0, hw, -hw)
    if np.linalg.norm(y - A @ corner) <= r:
        return float(-c @ corner), corner, 0.0

    G = A.T @ A
    b = A.T @ y
    L = 1.01 * float(np.linalg.eigvalsh(G)[-1])
    state = {"x": corner.copy()}

    def solve_at(lam: float) -> np.ndarray:
        x = _dual_inner(G, b, c, lam, L, hw, state["x"], inner_iters)
        state["x"] = x
        return x

    def dual_value(lam: float) -> float:
        x = solve_at(lam)
        res_sq = float(np.sum((y - A @ x) ** 2))
        return float(-c @ x) + lam * (res_sq - r * r)

    # bracket the dual maximizer: the inner residual crosses r there
    hi = 1.0
    while float(np.linalg.norm(y - A @ solve_at(hi))) > r and hi < lam_max:
        hi *= 2.0
    a, bb = 1e-10, min(hi * 2.0, lam_max)
    u = bb - _INV_PHI * (bb - a)
    v = a + _INV_PHI * (bb - a)
    du = dual_value(u)
    dv = dual_value(v)
    while (bb - a) > 1e-11 * bb:
        if du >= dv:
            bb, v, dv = v, u, du
            u = bb - _INV_PHI * (bb - a)
            du = dual_value(u)
        else:
            a, u, du = u, v, dv
            v = a + _INV_PHI * (bb - a)
            dv = dual_value(v)
    lam = u if du >= dv else v
    x = solve_at(lam)
    res_sq = float(np.sum((y - A @ x) ** 2))
    return float(-c @ x) + lam * (res_sq - r * r), x, lam


@dataclass
class OracleReport:
    """Outcome of the solver-vs-oracle suite on small seeded instances."""

    cases: int
    max_box_gap: float = 0.0
    max_clup_gap: float = 0.0
    max_kkt: float = 0.0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


_SUITE_CASES = (
    (4, 3, 0.5),
    (5, 4, 0.4),
    (6, 5, 0.3),
    (5, 5, 0.4),
    (6, 4, 0.7),
    (4, 4, 0.5),
    (6, 5, 0.5),
    (5, 4, 0.8),
    (6, 5, 0.8),
    (5, 5, 0.6),
)

# draws with a tiny relaxation optimum are skipped: r = r_scale * optimum
# would be a near-degenerate ball whose multiplier explodes, and certifying
# that corner tells us nothing about the operating regime
_MIN_RELAXATION_OPTIMUM = 0.25


def run_oracle_suite(cases: int = 100, seed: int = 0x0C5EED, r_scale: float = 1.3) -> OracleReport:
    """Certify both production solvers against the oracles on seeded cases.

    Gates: objectives within 1e-6 of the oracle, KKT residuals below 1e-6.
    """
    settings = SolverSettings(
        grad_tol=1e-12, radius_tol=1e-9, max_inner_iters=200_000, max_bisect_iters=400
    )
    report = OracleReport(cases=cases)
    done = 0
    draw = 0
    while done < cases:
        n, m, sigma = _SUITE_CASES[draw % len(_SUITE_CASES)]
        case_seed = _splitmix64(seed ^ draw)
        draw += 1
        instance = generate_instance(n, m / n, sigma, case_seed)
        A, y = instance.A, instance.y

        oracle_val, _ = box_ls_active_set(A, y)
        if oracle_val < _MIN_RELAXATION_OPTIMUM:
            continue
        done += 1

        ours = solve_box_ls(A, y, settings)
        gap = abs(ours.objective - oracle_val)
        report.max_box_gap = max(report.max_box_gap, gap)
        report.max_kkt = max(report.max_kkt, ours.kkt_residual)
        if gap > 1e-6:
            report.failures.append(f"case {done}: box gap {gap:.3e}")
        if ours.kkt_residual > 1e-6:
            report.failures.append(f"case {done}: box kkt {ours.kkt_residual:.3e}")

        rng = philox_generator(case_seed, 3)
        c = rng.standard_normal(n)
        c /= np.linalg.norm(c)
        r = r_scale * oracle_val
        ours_step = solve_clup_step(A, y, c, r, settings)
        oracle_obj, _, _ = clup_dual_scan(A, y, c, r)
        gap = abs(ours_step.objective - oracle_obj)
        report.max_clup_gap = max(report.max_clup_gap, gap)
        report.max_kkt = max(report.max_kkt, ours_step.kkt_residual)
        if gap > 1e-6:
            report.failures.append(f"case {done}: step gap {gap:.3e}")
        if ours_step.kkt_residual > 1e-6:
            report.failures.append(f"case {done}: step kkt {ours_step.kkt_residual:.3e}")
    return report
