"""First-iteration performance predictor for the relaxation start.

The relaxation's large-n behavior reduces to a deterministic scalar
saddle point: minimize over the error energy level c1z in [0, 4] the
gamma-maximum of

    xi(alpha, sigma; c1z, gamma) =
        sqrt(alpha) sqrt(c1z + sigma^2) + I11(gamma) + I21(gamma) - gamma c1z,

where I11/I21 are moments of the clipped per-coordinate minimizer
w = clip(-h/(2 gamma), 0, 2) of h w + gamma w^2 over w in [0, 2], h standard
normal. The optimal (gamma, c1z) then yields closed-form predictions for the
first iterate's overlap, squared norm, and sign-error probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0

# Argument tolerances for the nested golden-section searches. The outer one
# must stay tight in absolute terms: near sigma = 0 the optimal c1z shrinks
# like sigma^2 and a loose bracket would misplace gamma by orders of magnitude.
_C_TOL = 1e-13
_GAMMA_REL_TOL = 1e-12
_GAMMA_FLOOR = 1e-8
_GAMMA_CAP = 2.0**40


class BracketingError(RuntimeError):
    """The gamma-profile has no interior maximizer for the requested inputs."""


def integrals_I(gamma: float) -> tuple[float, float]:
    """Closed forms of the two regimes of E[min_{w in [0,2]} (h w + gamma w^2)].

    I11 is the contribution of the interior regime (w = -h/(2 gamma)); I21 the
    contribution of the regime clipped at w = 2. Both are validated against
    direct quadrature of the defining Gaussian expectations in the test suite.
    """
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    g4 = 4.0 * gamma
    i11 = -(
        math.exp(-0.5 * g4 * g4) * (-g4)
        + math.sqrt(math.pi / 2.0) * math.erf(g4 / math.sqrt(2.0))
    ) / (4.0 * _SQRT_2PI * gamma)
    i21 = 2.0 * gamma * math.erfc(g4 / math.sqrt(2.0)) - 2.0 * math.exp(-0.5 * g4 * g4) / _SQRT_2PI
    return i11, i21


def xi_rd1(alpha: float, sigma: float, c1z: float, gamma: float) -> float:
    """The scalar saddle objective at (c1z, gamma)."""
    if alpha <= 0.0 or sigma <= 0.0:
        raise ValueError("alpha and sigma must be positive")
    if not 0.0 <= c1z <= 4.0:
        raise ValueError(f"c1z must lie in [0, 4], got {c1z}")
    i11, i21 = integrals_I(gamma)
    return math.sqrt(alpha) * math.sqrt(c1z + sigma * sigma) + i11 + i21 - gamma * c1z


def _first_moment(gamma: float) -> float:
    """E w for the clipped minimizer (interior + clipped regimes)."""
    g4 = 4.0 * gamma
    interior = (1.0 - math.exp(-0.5 * g4 * g4)) / (2.0 * gamma * _SQRT_2PI)
    clipped = math.erfc(g4 / math.sqrt(2.0))
    return interior + clipped


def _second_moment(gamma: float) -> float:
    """E w^2; also the gamma-derivative of E[min_w ...] by the envelope theorem."""
    i11, _ = integrals_I(gamma)
    return -i11 / gamma + 2.0 * math.erfc(4.0 * gamma / math.sqrt(2.0))


def _golden_min(f, a: float, b: float, tol: float) -> float:
    """Golden-section search for the minimizer of a unimodal f on [a, b]."""
    h = b - a
    if h <= tol:
        return 0.5 * (a + b)
    steps = int(math.ceil(math.log(tol / h) / math.log(_INV_PHI)))
    c = a + _INV_PHI_SQ * h
    d = a + _INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(steps - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h *= _INV_PHI
            c = a + _INV_PHI_SQ * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            yd = f(d)
    return c if yc < yd else d


def _max_over_gamma(alpha: float, sigma: float, c1z: float) -> tuple[float, float, bool]:
    """Maximize xi over gamma > 0 at fixed c1z.

    d(xi)/d(gamma) = E w^2 - c1z is decreasing from 2 to 0, so an interior
    maximizer exists iff c1z < 2; the bracket [floor, hi] is expanded by
    doubling until the derivative changes sign. For c1z >= 2 the profile is
    decreasing from the left edge and the floor value is returned (flagged),
    which keeps the outer minimization routable across its whole interval.
    """
    if _second_moment(_GAMMA_FLOOR) <= c1z:
        return _GAMMA_FLOOR, xi_rd1(alpha, sigma, c1z, _GAMMA_FLOOR), False
    hi = 64.0
    while _second_moment(hi) > c1z:
        hi *= 2.0
        if hi > _GAMMA_CAP:
            raise BracketingError(
                f"no gamma bracket below {_GAMMA_CAP} for c1z={c1z} "
                f"(alpha={alpha}, sigma={sigma})"
            )
    gamma = _golden_min(
        lambda g: -xi_rd1(alpha, sigma, c1z, g),
        _GAMMA_FLOOR,
        hi,
        _GAMMA_REL_TOL * hi,
    )
    return gamma, xi_rd1(alpha, sigma, c1z, gamma), True


@dataclass
class TheoryFirstIter:
    """Saddle point and first-iterate statistics for one (alpha, sigma) regime.

    nu_hat and s1_hat are placeholder parameters fixed to 0 for this start.
    """

    alpha: float
    sigma: float
    gamma_hat: float
    c1z_hat: float
    xi: float
    nu_hat: float
    s1_hat: float
    p_err1: float
    e_z: float
    e_zsq: float
    d1_pred: float
    d2_pred: float


def solve_first_iteration(alpha: float, sigma: float) -> TheoryFirstIter:
    """Solve min over c1z in [0,4] of max over gamma, then fill the statistics."""
    if alpha <= 0.0 or sigma <= 0.0:
        raise ValueError("alpha and sigma must be positive")

    def profile(c1z: float) -> float:
        return _max_over_gamma(alpha, sigma, c1z)[1]

    c1z_hat = _golden_min(profile, 0.0, 4.0, _C_TOL)
    gamma_hat, xi_value, interior = _max_over_gamma(alpha, sigma, c1z_hat)
    if not interior:
        raise BracketingError(
            f"saddle landed on the gamma boundary: alpha={alpha}, sigma={sigma}, "
            f"c1z={c1z_hat}"
        )

    s_x1 = (1.0 - math.exp(-0.5 * (4.0 * gamma_hat) ** 2)) / (2.0 * gamma_hat * _SQRT_2PI)
    s_x2 = math.erfc(4.0 * gamma_hat / math.sqrt(2.0))
    i11, _ = integrals_I(gamma_hat)
    s_xsq1 = -i11 / gamma_hat
    s_xsq2 = 2.0 * s_x2
    e_z = s_x1 + s_x2
    e_zsq = s_xsq1 + s_xsq2
    d1_pred = 1.0 - e_z
    d2_pred = e_zsq + 2.0 * d1_pred - 1.0
    # P(w > 1) = 1 - 0.5 erfc(-2 gamma / sqrt(2)), evaluated on the
    # complementary side to avoid cancellation at large gamma
    p_err1 = 0.5 * math.erfc(2.0 * gamma_hat / math.sqrt(2.0))
    return TheoryFirstIter(
        alpha=float(alpha),
        sigma=float(sigma),
        gamma_hat=gamma_hat,
        c1z_hat=c1z_hat,
        xi=xi_value,
        nu_hat=0.0,
        s1_hat=0.0,
        p_err1=p_err1,
        e_z=e_z,
        e_zsq=e_zsq,
        d1_pred=d1_pred,
        d2_pred=d2_pred,
    )
