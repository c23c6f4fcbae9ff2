import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from clup.model import snr_db_to_sigma
from clup.theory import (
    _max_over_gamma,
    integrals_I,
    solve_first_iteration,
    xi_rd1,
)

SIGMA_13DB = snr_db_to_sigma(13.0)


def _phi(h):
    return math.exp(-0.5 * h * h) / math.sqrt(2.0 * math.pi)


def quadrature_integrals(gamma: float) -> tuple[float, float]:
    """Direct quadrature of the defining Gaussian expectations.

    The per-coordinate minimizer of h w + gamma w^2 over w in [0, 2] is
    w = clip(-h/(2 gamma), 0, 2); the interior regime contributes
    -h^2/(4 gamma) on [-4 gamma, 0], the clipped regime 2h + 4 gamma below.
    """
    i11, _ = integrate.quad(
        lambda h: (-h * h / (4.0 * gamma)) * _phi(h), -4.0 * gamma, 0.0,
        epsabs=1e-12, epsrel=1e-12, limit=200,
    )
    lo = max(-40.0, -4.0 * gamma - 40.0)
    i21, _ = integrate.quad(
        lambda h: (2.0 * h + 4.0 * gamma) * _phi(h), lo, -4.0 * gamma,
        epsabs=1e-12, epsrel=1e-12, limit=200,
    )
    return i11, i21


def test_closed_forms_match_quadrature_at_20_gammas():
    rng = np.random.default_rng(20)
    gammas = rng.uniform(0.05, 10.0, size=20)
    for gamma in gammas:
        i11, i21 = integrals_I(float(gamma))
        q11, q21 = quadrature_integrals(float(gamma))
        assert i11 == pytest.approx(q11, abs=1e-8)
        assert i21 == pytest.approx(q21, abs=1e-8)


def test_quadrature_match_at_half():
    i11, i21 = integrals_I(0.5)
    q11, q21 = quadrature_integrals(0.5)
    assert i11 == pytest.approx(q11, abs=1e-10)
    assert i21 == pytest.approx(q21, abs=1e-10)


def test_tail_integral_vanishes_at_large_gamma():
    _, i21 = integrals_I(50.0)
    assert abs(i21) <= 1e-12


def test_integrals_reject_nonpositive_gamma():
    with pytest.raises(ValueError):
        integrals_I(0.0)
    with pytest.raises(ValueError):
        integrals_I(-1.0)


def test_xi_composition_at_ones():
    i11, i21 = integrals_I(1.0)
    assert xi_rd1(1.0, 1.0, 1.0, 1.0) == pytest.approx(
        math.sqrt(2.0) + i11 + i21 - 1.0, abs=1e-15
    )


def test_xi_domain_checks():
    with pytest.raises(ValueError):
        xi_rd1(0.8, SIGMA_13DB, 4.5, 1.0)
    with pytest.raises(ValueError):
        xi_rd1(0.8, SIGMA_13DB, -0.1, 1.0)
    with pytest.raises(ValueError):
        xi_rd1(0.8, SIGMA_13DB, 0.1, 0.0)
    with pytest.raises(ValueError):
        xi_rd1(-0.8, SIGMA_13DB, 0.1, 1.0)
    with pytest.raises(ValueError):
        xi_rd1(0.8, 0.0, 0.1, 1.0)


def test_xi_at_tabulated_saddle_point():
    assert xi_rd1(0.8, SIGMA_13DB, 0.0835, 1.2233) == pytest.approx(0.1226, abs=5e-4)


def test_xi_decays_past_the_interior_maximizer_at_zero_energy():
    # at c1z = 0 the profile is increasing toward its supremum; with c1z > 0 the
    # -gamma c1z term dominates eventually, so sampled values decay past gamma_hat
    values = [xi_rd1(0.8, SIGMA_13DB, 0.5, g) for g in (1.0, 2.0, 4.0, 8.0, 16.0)]
    assert all(values[i] > values[i + 1] for i in range(2, len(values) - 1))


def test_first_iteration_reproduces_tabulated_regime():
    t = solve_first_iteration(0.8, SIGMA_13DB)
    assert t.gamma_hat == pytest.approx(1.2233, abs=1e-3)
    assert t.c1z_hat == pytest.approx(0.0835, abs=1e-3)
    assert t.xi == pytest.approx(0.1226, abs=1e-3)
    assert t.p_err1 == pytest.approx(0.0072, abs=2e-4)
    assert t.d2_pred == pytest.approx(0.7574, abs=1e-3)
    assert t.d1_pred == pytest.approx(0.8369, abs=1e-3)
    assert t.nu_hat == 0.0 and t.s1_hat == 0.0


def test_error_probability_consistent_with_gamma():
    # complement check of the sign-error probability at the tabulated gamma
    p_err = 1.0 - 0.5 * math.erfc(-2.0 * 1.2233 / math.sqrt(2.0))
    assert p_err == pytest.approx(0.00722, abs=5e-5)
    assert 1.0 - p_err == pytest.approx(0.99278, abs=5e-5)
    t = solve_first_iteration(0.8, SIGMA_13DB)
    assert t.p_err1 == pytest.approx(p_err, abs=5e-5)


def test_noiseless_limit_recovers_truth():
    t = solve_first_iteration(0.8, 1e-6)
    assert t.p_err1 <= 1e-9
    assert t.d1_pred >= 1.0 - 1e-6


def test_saddle_identities():
    t = solve_first_iteration(0.8, SIGMA_13DB)
    assert t.d2_pred == pytest.approx(t.e_zsq + 2.0 * t.d1_pred - 1.0, abs=1e-12)
    assert t.e_zsq == pytest.approx(t.c1z_hat, abs=1e-8)
    assert 0.0 <= t.c1z_hat <= 4.0 and t.gamma_hat > 0.0


def test_saddle_stationarity_and_curvature_signs():
    t = solve_first_iteration(0.8, SIGMA_13DB)
    step = 1e-6
    d_gamma = (
        xi_rd1(0.8, SIGMA_13DB, t.c1z_hat, t.gamma_hat + step)
        - xi_rd1(0.8, SIGMA_13DB, t.c1z_hat, t.gamma_hat - step)
    ) / (2.0 * step)
    assert abs(d_gamma) <= 1e-5
    # max in gamma at fixed c1z
    up = xi_rd1(0.8, SIGMA_13DB, t.c1z_hat, t.gamma_hat + 1e-3)
    down = xi_rd1(0.8, SIGMA_13DB, t.c1z_hat, t.gamma_hat - 1e-3)
    at = xi_rd1(0.8, SIGMA_13DB, t.c1z_hat, t.gamma_hat)
    assert up <= at + 1e-12 and down <= at + 1e-12
    # min in c1z of the gamma-maximized profile
    f_at = _max_over_gamma(0.8, SIGMA_13DB, t.c1z_hat)[1]
    f_up = _max_over_gamma(0.8, SIGMA_13DB, t.c1z_hat + 1e-3)[1]
    f_down = _max_over_gamma(0.8, SIGMA_13DB, t.c1z_hat - 1e-3)[1]
    assert f_up >= f_at - 1e-12 and f_down >= f_at - 1e-12


def test_solve_rejects_bad_regime():
    with pytest.raises(ValueError):
        solve_first_iteration(0.0, 0.3)
    with pytest.raises(ValueError):
        solve_first_iteration(0.8, -0.1)


@settings(derandomize=True, max_examples=25, deadline=None)
@given(gamma=st.floats(min_value=0.05, max_value=10.0))
def test_closed_forms_match_quadrature_everywhere(gamma):
    i11, i21 = integrals_I(gamma)
    q11, q21 = quadrature_integrals(gamma)
    assert abs(i11 - q11) <= 1e-8
    assert abs(i21 - q21) <= 1e-8


@settings(derandomize=True, max_examples=10, deadline=None)
@given(
    alpha=st.floats(min_value=0.5, max_value=1.5),
    snr_db=st.floats(min_value=10.0, max_value=16.0),
)
def test_saddle_is_stationary_across_regimes(alpha, snr_db):
    sigma = snr_db_to_sigma(snr_db)
    t = solve_first_iteration(alpha, sigma)
    step = 1e-6
    d_gamma = (
        xi_rd1(alpha, sigma, t.c1z_hat, t.gamma_hat + step)
        - xi_rd1(alpha, sigma, t.c1z_hat, t.gamma_hat - step)
    ) / (2.0 * step)
    assert abs(d_gamma) <= 1e-5
    assert t.e_zsq == pytest.approx(t.c1z_hat, abs=1e-6)
