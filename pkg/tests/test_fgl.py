import pytest
from gmpy2 import mpq
from hypothesis import given, strategies as st

from fglab.fgl import (
    U,
    V,
    X,
    ExponentialPair,
    FGLValidationError,
    FormalGroupLaw,
    _log,
    additive_fgl,
    bivariate_table,
    coefficient_of,
    fgl_from_exponential,
    fgl_inverse,
    fgl_mod_l,
    fgl_sub,
    fgl_sum,
    fgl_twist,
    l_series,
    multiplicative_fgl,
    n_series,
    univariate_table,
    universal_exponential,
    universal_fgl,
)
from fglab.series import GF, SeriesError, TruncatedSeries, substitute
from fglab.selftest import twisted_additive_law


def uv(F):
    T = F.F.vars
    return TruncatedSeries.variable(T, U, F.order), TruncatedSeries.variable(T, V, F.order)


def test_additive_law():
    F = additive_fgl(6)
    u, v = uv(F)
    assert F.F == u + v
    assert fgl_inverse(F) == -TruncatedSeries.variable(fgl_inverse(F).vars, X, 6)


def test_multiplicative_law_numeric_parameter():
    F = multiplicative_fgl(6, t=1)
    u, v = uv(F)
    assert F.F == u + v - u * v


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_multiplicative_n_series(n):
    # [n](x) = (1 - (1 - x)^n) for t = 1
    F = multiplicative_fgl(8, t=1)
    s = n_series(F, n)
    T = s.vars
    x = TruncatedSeries.variable(T, X, 8)
    assert s == 1 - (1 - x) ** n


def test_multiplicative_inverse():
    F = multiplicative_fgl(7, t=1)
    inv = fgl_inverse(F)
    T = inv.vars
    x = TruncatedSeries.variable(T, X, 7)
    # u + i(u) - u i(u) = 0 gives i(u) = -u / (1 - u)
    assert inv * (1 - x) == -x


def test_multiplicative_log():
    F = multiplicative_fgl(7)
    g = F.log().log
    T = g.vars
    coeffs = [g.coeff((n, n - 1)) for n in range(1, 8)]
    assert coeffs == [mpq(1, n) for n in range(1, 8)]


@pytest.mark.parametrize("order", [4, 6, 8])
def test_universal_law_validates(order):
    F = universal_fgl(order)
    assert F.F.is_homogeneous(1)
    u, v = uv(F)
    b1 = TruncatedSeries.variable(F.F.vars, "b1")
    assert F.F.graded_piece(2) == (u * v * b1 * 2).with_order(None)


def test_universal_log_exp_duality():
    F = universal_fgl(7, check_order=None)
    pair = F.log()
    T = F.F.vars
    g = pair.log
    gu = substitute(g, {X: TruncatedSeries.variable(T, U, 7)}, T)
    gv = substitute(g, {X: TruncatedSeries.variable(T, V, 7)}, T)
    assert substitute(g, {X: F.F}, T) == gu + gv


def test_cached_log_matches_invariant_differential():
    F = universal_fgl(7, check_order=None)
    assert _log(F).log == F.log().log


def test_exponential_pair_tau():
    lam = universal_exponential(5)
    pair = ExponentialPair.from_exp(lam)
    assert [t.to_str() for t in pair.tau] == ["(1)*b1", "(1)*b2", "(1)*b3", "(1)*b4"]


def test_twist_of_additive_is_multiplicative():
    tw = twisted_additive_law(8)
    assert tw == multiplicative_fgl(8).F


def test_twist_by_identity_is_trivial():
    F = universal_fgl(6, check_order=None)
    T = univariate_table([])
    x = TruncatedSeries.variable(T, X, 6)
    G = fgl_twist(F, ExponentialPair(x, x))
    assert G.F == F.F


def test_sum_and_difference():
    F = universal_fgl(6, check_order=None)
    T = F.F.vars
    u = TruncatedSeries.variable(T, U, 6)
    v = TruncatedSeries.variable(T, V, 6)
    assert fgl_sum(F, u, v) == F.F
    assert fgl_sub(F, fgl_sum(F, u, v), v) == u


def test_rejects_asymmetric_series():
    T = bivariate_table([])
    F = TruncatedSeries.from_dict(T, {(1, 0): 1, (0, 1): 1, (2, 1): 1}, 5)
    with pytest.raises(FGLValidationError) as e:
        FormalGroupLaw(F)
    assert "symmetry" in e.value.axiom


def test_rejects_non_associative_series():
    T = bivariate_table([])
    F = TruncatedSeries.from_dict(T, {(1, 0): 1, (0, 1): 1, (2, 2): 1}, 6)
    with pytest.raises(FGLValidationError) as e:
        FormalGroupLaw(F)
    assert "associativity" in e.value.axiom


def test_rejects_non_unital_series():
    T = bivariate_table([])
    F = TruncatedSeries.from_dict(T, {(1, 0): 1, (0, 1): 1, (2, 0): 1}, 5)
    with pytest.raises(FGLValidationError):
        FormalGroupLaw(F)


@pytest.mark.parametrize("l", [2, 3, 5])
def test_multiplicative_mod_l_height_one(l):
    F = fgl_mod_l(multiplicative_fgl(l + 1, t=1), l)
    rep = l_series(F, l, 1)
    assert rep.v[0].is_zero()
    assert rep.v[1] == TruncatedSeries.constant(rep.v[1].vars, 1, None, GF(l))


def test_additive_mod_l_has_zero_l_series():
    F = fgl_mod_l(additive_fgl(9), 3)
    rep = l_series(F, 3, 2)
    assert rep.n_series.is_zero()


def test_l_series_needs_enough_order():
    with pytest.raises(SeriesError):
        l_series(multiplicative_fgl(5, t=1), 3, 2)


@given(st.integers(2, 4), st.integers(1, 3))
def test_lazard_coefficients_are_integral_combinations(n, m):
    # the coefficient of u^n v^m lies in Z[b] after scaling by the binomial
    F = universal_fgl(7, check_order=None)
    c = coefficient_of(coefficient_of(F.F, U, n), V, m)
    assert c.is_integral()
