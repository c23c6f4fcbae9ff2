"""Convex subproblems at the heart of the detector.

Two solvers over the hypercube [-1/sqrt(n), +1/sqrt(n)]^n:

* least squares (the polytope relaxation), by projected gradient;
* a linear objective restricted to a residual-norm ball, by bisection on the
  dual multiplier of the squared-ball constraint with projected-gradient
  inner solves.

Everything runs on matvecs with A (or its Gram matrix); box feasibility is
enforced by projection at every iterate, never merely approximated.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model import philox_generator

_POWER_ITERATION_SEED = 0x5DEECE66D
_POWER_STREAM = 2


class SolveStatus(enum.Enum):
    CONVERGED = "converged"
    ITER_LIMIT = "iter_limit"


class InfeasibleRadiusError(RuntimeError):
    """The residual ball of radius r does not intersect the hypercube."""


@dataclass
class SolverSettings:
    """Tolerances and caps shared by both subproblem solvers."""

    grad_tol: float = 1e-8
    radius_tol: float = 1e-6
    max_inner_iters: int = 20000
    max_bisect_iters: int = 200

    def __post_init__(self) -> None:
        if self.grad_tol <= 0.0 or self.radius_tol <= 0.0:
            raise ValueError("tolerances must be strictly positive")
        if self.max_inner_iters < 1 or self.max_bisect_iters < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass
class SubproblemResult:
    """Solution of one convex subproblem plus its optimality certificate.

    kkt_residual is the max-norm of x - clip(x - grad) at the returned point
    (the projected-gradient optimality map). dual_path records the
    (multiplier, residual) pairs probed during bisection, in evaluation order.
    """

    x: np.ndarray
    objective: float
    residual_norm: float
    status: SolveStatus
    kkt_residual: float
    lam: float | None = None
    dual_path: list[tuple[float, float]] | None = None


def spectral_norm_sq(A: np.ndarray, rel_tol: float = 1e-6, max_iters: int = 200) -> float:
    """Upper estimate of sigma_max(A)^2 via power iteration, inflated by 1%.

    The start vector comes from a fixed Philox stream, so the estimate is
    reproducible.
    """
    if not np.any(A):
        raise ValueError("spectral norm bound of the zero matrix is undefined")
    n = A.shape[1]
    rng = philox_generator(_POWER_ITERATION_SEED, _POWER_STREAM)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(max_iters):
        w = A.T @ (A @ v)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            # v fell in the null space; redraw and keep going
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            continue
        rayleigh = float(v @ w) / float(v @ v)
        v = w / norm_w
        if estimate > 0.0 and abs(rayleigh - estimate) <= rel_tol * rayleigh:
            estimate = rayleigh
            break
        estimate = rayleigh
    return 1.01 * estimate


@dataclass(frozen=True)
class Gram:
    """Per-system precomputation shared across many subproblem solves."""

    G: np.ndarray  # A^T A
    b: np.ndarray  # A^T y
    L: float       # upper bound on sigma_max(A)^2

    @classmethod
    def from_system(cls, A: np.ndarray, y: np.ndarray) -> "Gram":
        return cls(G=A.T @ A, b=A.T @ y, L=spectral_norm_sq(A))


def _check_dimensions(A: np.ndarray, y: np.ndarray) -> tuple[int, int]:
    if A.ndim != 2:
        raise ValueError(f"A must be a matrix, got ndim={A.ndim}")
    m, n = A.shape
    if y.shape != (m,):
        raise ValueError(f"y has shape {y.shape}, expected ({m},)")
    return m, n


def solve_box_ls(
    A: np.ndarray,
    y: np.ndarray,
    settings: SolverSettings | None = None,
    gram: Gram | None = None,
    x0: np.ndarray | None = None,
) -> SubproblemResult:
    """Minimize 0.5 ||y - A x||^2 over the hypercube.

    Projected gradient with step 1/L. Stops once the optimality map satisfies
    ||x - clip(x - grad)||_inf <= grad_tol * (1 + ||A^T y||_inf); the reported
    objective is the un-squared residual norm ||y - A x||_2.
    """
    settings = settings if settings is not None else SolverSettings()
    m, n = _check_dimensions(A, y)
    gram = gram if gram is not None else Gram.from_system(A, y)
    G, b, L = gram.G, gram.b, gram.L
    hw = 1.0 / math.sqrt(n)
    tol = settings.grad_tol * (1.0 + float(np.max(np.abs(b))))

    x = np.clip(x0, -hw, hw) if x0 is not None else np.zeros(n)
    status = SolveStatus.ITER_LIMIT
    for _ in range(settings.max_inner_iters):
        grad = G @ x - b
        kkt = float(np.max(np.abs(x - np.clip(x - grad, -hw, hw))))
        if kkt <= tol:
            status = SolveStatus.CONVERGED
            break
        x = np.clip(x - grad / L, -hw, hw)
    else:
        grad = G @ x - b
        kkt = float(np.max(np.abs(x - np.clip(x - grad, -hw, hw))))

    residual = float(np.linalg.norm(y - A @ x))
    return SubproblemResult(
        x=x, objective=residual, residual_norm=residual, status=status, kkt_residual=kkt
    )


def _inner_descent(
    G: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    lam: float,
    L: float,
    hw: float,
    x0: np.ndarray,
    settings: SolverSettings,
) -> tuple[np.ndarray, bool]:
    """Projected gradient on  -c^T x + lam (||y - A x||^2 - r^2)  over the box.

    Computed in 1/(2 lam)-scaled form: the update
        x <- clip(x - ((G x - b) - c/(2 lam)) / L)
    takes exactly the step 1/(2 lam L) on the Lagrangian gradient while
    keeping the fixed-point test well scaled for large multipliers.
    """
    shift = b + c / (2.0 * lam)
    tol = settings.grad_tol * (1.0 + float(np.max(np.abs(shift))))
    x = x0
    for _ in range(settings.max_inner_iters):
        g = G @ x - shift
        if float(np.max(np.abs(x - np.clip(x - g, -hw, hw)))) <= tol:
            return x, True
        x = np.clip(x - g / L, -hw, hw)
    return x, False


def solve_clup_step(
    A: np.ndarray,
    y: np.ndarray,
    c: np.ndarray,
    r: float,
    settings: SolverSettings | None = None,
    gram: Gram | None = None,
    x_warm: np.ndarray | None = None,
    lam_hint: float | None = None,
    r_min: float | None = None,
) -> SubproblemResult:
    """Minimize -c^T x over {||y - A x||_2 <= r} intersected with the hypercube.

    The box corner sign(c)/sqrt(n) is returned exactly when it already sits
    inside the ball (ties c_i = 0 resolve to +1/sqrt(n)). Otherwise the
    squared-ball constraint is dualized and its multiplier lam found by
    bisection, each inner problem solved by projected gradient with step
    1/(2 lam L); the inner residual is nonincreasing in lam, and bisection
    stops when |residual - r| <= radius_tol * r.

    x_warm / lam_hint seed the inner iterations and the bisection bracket;
    they speed things up without changing the certified result. r_min, when
    known (the relaxation optimum), enables an immediate infeasibility check.
    """
    settings = settings if settings is not None else SolverSettings()
    m, n = _check_dimensions(A, y)
    if c.shape != (n,):
        raise ValueError(f"c has shape {c.shape}, expected ({n},)")
    if not np.any(c):
        raise ValueError("objective direction c must be nonzero")
    if r <= 0.0:
        raise ValueError(f"radius must be positive, got {r}")
    if r_min is not None and r < r_min * (1.0 - settings.radius_tol):
        raise InfeasibleRadiusError(
            f"radius r={r} is below the hypercube optimum {r_min}"
        )

    hw = 1.0 / math.sqrt(n)
    corner = np.where(c >= 0.0, hw, -hw)
    corner_residual = float(np.linalg.norm(y - A @ corner))
    if corner_residual <= r:
        return SubproblemResult(
            x=corner,
            objective=float(-c @ corner),
            residual_norm=corner_residual,
            status=SolveStatus.CONVERGED,
            kkt_residual=0.0,
            lam=0.0,
            dual_path=[],
        )

    gram = gram if gram is not None else Gram.from_system(A, y)
    G, b, L = gram.G, gram.b, gram.L
    path: list[tuple[float, float]] = []
    inner_ok_last = True

    def probe(lam: float, x_start: np.ndarray) -> tuple[np.ndarray, float]:
        nonlocal inner_ok_last
        x, ok = _inner_descent(G, b, c, lam, L, hw, x_start, settings)
        inner_ok_last = ok
        res = float(np.linalg.norm(y - A @ x))
        path.append((lam, res))
        return x, res

    x_start = np.clip(x_warm, -hw, hw) if x_warm is not None else corner
    if lam_hint is not None and lam_hint > 0.0:
        lo, hi = lam_hint / 4.0, lam_hint * 4.0
    else:
        lo, hi = 0.0, 1.0

    x_hi, res_hi = probe(hi, x_start)
    doublings = 0
    while res_hi > r:
        lo, hi = hi, 2.0 * hi
        x_hi, res_hi = probe(hi, x_hi)
        doublings += 1
        if doublings > 80:
            # the ball looks unreachable; certify against the relaxation optimum
            relax = solve_box_ls(A, y, settings, gram=gram, x0=x_hi)
            if relax.residual_norm > r * (1.0 + settings.radius_tol):
                raise InfeasibleRadiusError(
                    f"radius r={r} is below the hypercube optimum "
                    f"{relax.residual_norm}"
                )
            return SubproblemResult(
                x=relax.x,
                objective=float(-c @ relax.x),
                residual_norm=relax.residual_norm,
                status=relax.status,
                kkt_residual=relax.kkt_residual,
                lam=hi,
                dual_path=path,
            )
    if lo > 0.0:
        # hint bracket may sit entirely on the feasible side; walk it down
        x_lo, res_lo = probe(lo, x_hi)
        while res_lo <= r:
            hi, x_hi, res_hi = lo, x_lo, res_lo
            lo = lo / 4.0
            if lo < 1e-15:
                lo = 0.0
                break
            x_lo, res_lo = probe(lo, x_lo)

    x_cur, res_cur, lam_cur = x_hi, res_hi, hi
    x_feas, res_feas, lam_feas = x_hi, res_hi, hi
    bisect_ok = True
    bisections = 0
    while abs(res_cur - r) > settings.radius_tol * r:
        if bisections >= settings.max_bisect_iters or (hi - lo) <= 1e-15 * hi:
            # fall back to the tightest feasible point seen
            x_cur, res_cur, lam_cur = x_feas, res_feas, lam_feas
            bisect_ok = False
            break
        bisections += 1
        mid = 0.5 * (lo + hi)
        x_cur, res_cur = probe(mid, x_cur)
        lam_cur = mid
        if res_cur > r:
            lo = mid
        else:
            hi = mid
            x_feas, res_feas, lam_feas = x_cur, res_cur, mid

    grad = 2.0 * lam_cur * (G @ x_cur - b) - c
    kkt = float(np.max(np.abs(x_cur - np.clip(x_cur - grad, -hw, hw))))
    converged = bisect_ok and inner_ok_last
    return SubproblemResult(
        x=x_cur,
        objective=float(-c @ x_cur),
        residual_norm=res_cur,
        status=SolveStatus.CONVERGED if converged else SolveStatus.ITER_LIMIT,
        kkt_residual=kkt,
        lam=lam_cur,
        dual_path=path,
    )
