import math

import numpy as np
import pytest

from fglab.analytic import (
    TWO_PI_I,
    AnalyticError,
    LatticeParams,
    analytic_algebraic_bridge,
    eisenstein_g,
    eisenstein_qseries,
    eta_constants,
    flop_pattern_points,
    identity_trials,
    krichever_Q_numeric,
    random_constrained_points,
    sigma_eval,
    taylor_on_circle,
    ww_identity_check,
    zeta_eval,
)

SQUARE = LatticeParams(1j, 40)
SKEW = LatticeParams(0.1 + 1.2j, 40)


# ---------------------------------------------------------------------------
# sigma and zeta


@pytest.mark.parametrize("z", [0.1, 0.2 + 0.1j, -0.31 + 0.27j])
@pytest.mark.parametrize("L", [SQUARE, SKEW])
def test_sigma_is_odd(z, L):
    assert abs(sigma_eval(-z, L) + sigma_eval(z, L)) < 1e-14


def test_sigma_is_normalized_at_zero():
    for z in (1e-3, 1e-3j):
        assert abs(sigma_eval(z, SQUARE) / z - 1) < 1e-10
    assert sigma_eval(0, SQUARE) == 0


def test_sigma_vanishes_at_lattice_points():
    assert abs(sigma_eval(1, SQUARE)) < 1e-12
    assert abs(sigma_eval(1j, SQUARE)) < 1e-12


@pytest.mark.parametrize("z", [0.2 + 0.05j, 0.37 - 0.22j])
def test_zeta_is_log_derivative_of_sigma(z):
    c = taylor_on_circle(lambda t: sigma_eval(z + t, SKEW), 1, 0.02, 64)
    assert abs(c[1] / c[0] - zeta_eval(z, SKEW)) < 1e-9


def test_tail_correction_stabilizes_lattice_radius():
    z = 0.3 + 0.2j
    small, big = LatticeParams(1j, 20), LatticeParams(1j, 60)
    corrected = abs(sigma_eval(z, small) - sigma_eval(z, big))
    raw = abs(sigma_eval(z, small, corrected=False) - sigma_eval(z, big, corrected=False))
    assert corrected < 1e-12
    assert corrected < raw


# ---------------------------------------------------------------------------
# quasi-periods


def test_eta_constants_of_square_lattice():
    eta = eta_constants(SQUARE)
    assert abs(eta.eta1 - math.pi) < 1e-9
    assert abs(eta.eta2 + 1j * math.pi) < 1e-9


@pytest.mark.parametrize("tau", [1j, 0.1 + 1.2j, -0.3 + 0.9j])
def test_legendre_relation(tau):
    eta = eta_constants(LatticeParams(tau, 40))
    assert eta.legendre_residual(tau) < 1e-9
    assert eta.consistency < 1e-8


def test_sigma_quasi_periodicity():
    eta = eta_constants(SKEW)
    z = 0.21 - 0.13j
    lhs = sigma_eval(z + 1, SKEW)
    rhs = -np.exp(eta.eta1 * (z + 0.5)) * sigma_eval(z, SKEW)
    assert abs(lhs - rhs) < 1e-10


# ---------------------------------------------------------------------------
# the n-point identity


@pytest.mark.parametrize("n", [2, 3, 4])
def test_identity_random_points(n):
    rep = identity_trials(n, 10, seed=3, L=SQUARE, tol=1e-8)
    assert rep.passed
    assert len(rep.residuals) == 10


def test_identity_flop_pattern():
    rep = identity_trials(4, 10, seed=3, L=SKEW, tol=1e-8, pattern="flop")
    assert rep.passed
    assert rep.pattern == "flop"


def test_identity_fails_without_constraint():
    rng = np.random.default_rng(0)
    x, y = random_constrained_points(3, rng)
    y[0] += 0.05
    with pytest.raises(AnalyticError):
        ww_identity_check(3, x, y, SQUARE)
    # with the constraint dropped the sum is genuinely nonzero
    assert ww_identity_check(3, x, y, SQUARE, tol=1.0) > 1e-6


def test_identity_rejects_repeated_points():
    with pytest.raises(AnalyticError):
        ww_identity_check(2, [0.1, 0.1], [0.05, 0.15], SQUARE)


def test_flop_pattern_sums_match():
    x, y = flop_pattern_points(np.random.default_rng(5))
    assert abs(sum(x) - sum(y)) < 1e-14


def test_trials_are_seeded():
    a = identity_trials(3, 5, seed=11, L=SQUARE).residuals
    b = identity_trials(3, 5, seed=11, L=SQUARE).residuals
    assert a == b


# ---------------------------------------------------------------------------
# q-expansions


def test_g4_of_square_lattice():
    # G_4(i) = Gamma(1/4)^8 / (960 pi^2)
    assert abs(eisenstein_g(4, 1j) - math.gamma(0.25) ** 8 / (960 * math.pi ** 2)) < 1e-10


def test_g2_series_matches_lattice_g4():
    _, _, G = eisenstein_qseries()
    assert abs(G.evaluate(0.0, 1j) * (2 * math.pi) ** 4 - 60 * eisenstein_g(4, 1j)) < 1e-8


def test_g2_constant_term():
    _, _, G = eisenstein_qseries()
    assert G.leading_value(0.5) == 1 / 12


def test_x_at_q_zero():
    X, _, _ = eisenstein_qseries()
    y = 0.3
    assert abs(X.leading_value(y) - (1 / 12 + y / (1 - y) ** 2)) < 1e-15


def test_x_and_y_are_weierstrass_p_and_derivative():
    X, Y, _ = eisenstein_qseries()
    z = 0.13 + 0.07j
    c = taylor_on_circle(lambda t: zeta_eval(z + t, SKEW), 2, 0.05, 64)
    assert abs(-c[1] - TWO_PI_I ** 2 * X.evaluate(z, SKEW.tau)) < 1e-9
    assert abs(-2 * c[2] - TWO_PI_I ** 3 * Y.evaluate(z, SKEW.tau)) < 1e-8


def test_y_is_odd():
    _, Y, _ = eisenstein_qseries()
    z = 0.17 + 0.04j
    assert abs(Y.evaluate(z, 1j) + Y.evaluate(-z, 1j)) < 1e-12


def test_qseries_window_limits():
    with pytest.raises(AnalyticError):
        eisenstein_qseries(17, 16)
    with pytest.raises(AnalyticError):
        eisenstein_qseries(12, 10)


# ---------------------------------------------------------------------------
# the bridge


def test_bridge_default_point():
    rep = analytic_algebraic_bridge()
    assert rep.passed
    assert max(rep.residuals) < 1e-8


@pytest.mark.parametrize("z,tau,k", [(0.21 + 0.1j, 1j, 0.0), (0.35, 0.1 + 1.2j, 0.4 - 0.2j)])
def test_bridge_other_points(z, tau, k):
    assert analytic_algebraic_bridge(z, tau, k, N=5).passed


def test_bridge_q_starts_at_one():
    c = krichever_Q_numeric(2, 0.3, 1j, 0.1)
    assert abs(c[0] - 1) < 1e-12


def test_bridge_stable_under_lattice_radius():
    a = analytic_algebraic_bridge(L=LatticeParams(1j, 40)).analytic
    b = analytic_algebraic_bridge(L=LatticeParams(1j, 50)).analytic
    assert max(abs(p - q) for p, q in zip(a, b)) < 1e-12


def test_first_coefficient_moves_with_k():
    f1 = [krichever_Q_numeric(1, 0.3, 1j, k)[1] for k in (0.1, 0.2)]
    assert abs((f1[1] - f1[0]) / 0.1 - 1) < 1e-10


def test_bridge_rejects_large_q():
    with pytest.raises(AnalyticError):
        krichever_Q_numeric(3, 0.3, 0.3j, 0.0)
    with pytest.raises(AnalyticError):
        analytic_algebraic_bridge(N=7)


def test_lattice_validation():
    with pytest.raises(AnalyticError):
        LatticeParams(-1j)
    with pytest.raises(AnalyticError):
        LatticeParams(1j, 0)
