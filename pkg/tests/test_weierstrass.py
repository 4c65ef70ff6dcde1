import pytest
import sympy as sp
from gmpy2 import mpq

from fglab.fgl import U, V, X, additive_fgl
from fglab.series import GF, TruncatedSeries, substitute
from fglab.weierstrass import (
    MU_NAMES,
    WeierstrassCurve,
    curve_formal_group,
    curve_invariants,
    curve_w_series,
    discriminant_check,
    displayed_b4,
    krichever_curve_fgl,
    krichever_exponential,
    krichever_fgl,
    krichever_q,
    phi_curve,
)


def to_sympy(s: TruncatedSeries):
    syms = [sp.Symbol(n) for n in s.vars.names]
    out = 0
    for exps, c in s.items():
        term = sp.Rational(int(c.numerator), int(c.denominator))
        for x, e in zip(syms, exps):
            term *= x ** e
        out += term
    return sp.expand(out)


# ---------------------------------------------------------------------------
# invariants


def test_invariants_of_y2_equals_x3_minus_x():
    inv = curve_invariants(WeierstrassCurve.from_values([0, 0, 0, -1, 0]))
    num, den = inv.j
    assert to_sympy(inv.delta) == 64
    assert to_sympy(num) / to_sympy(den) == 1728


def test_invariants_of_y2_plus_y_equals_x3_minus_x():
    # conductor 37 curve: discriminant 37
    inv = curve_invariants(WeierstrassCurve.from_values([0, 0, 1, -1, 0]))
    assert to_sympy(inv.delta) == 37


def test_generic_invariant_identities():
    assert curve_invariants(WeierstrassCurve.generic()).identities_hold()


def test_phi_discriminant_and_b4():
    r = discriminant_check()
    assert r.passed
    assert r.details["identities"]
    inv = curve_invariants(phi_curve(integral=False))
    assert inv.b4 == displayed_b4()


def test_phi_b2_is_twelve_a2():
    inv = curve_invariants(phi_curve(integral=True))
    a2 = TruncatedSeries.variable(inv.b2.vars, "a2")
    assert inv.b2 == a2 * 12


# ---------------------------------------------------------------------------
# formal group of the curve


def test_w_series_leading_terms():
    w = curve_w_series(WeierstrassCurve.generic(), 5)
    T = w.vars
    z = TruncatedSeries.variable(T, X)
    m = {n: TruncatedSeries.variable(T, n) for n in MU_NAMES}
    expected = z ** 3 + m["mu1"] * z ** 4 + (m["mu1"] ** 2 + m["mu2"]) * z ** 5
    assert w == expected.with_order(5)


def test_generic_law_through_degree_four():
    F = curve_formal_group(WeierstrassCurve.generic(), 4).F
    T = F.vars
    u, v = TruncatedSeries.variable(T, U), TruncatedSeries.variable(T, V)
    m1, m2, m3 = (TruncatedSeries.variable(T, n) for n in ("mu1", "mu2", "mu3"))
    expected = (u + v - m1 * u * v - m2 * (u * u * v + u * v * v)
                - m3 * 2 * (u ** 3 * v + u * v ** 3) + (m1 * m2 - m3 * 3) * u * u * v * v)
    assert F == expected.with_order(4)


def test_generic_law_log_matches_invariant_differential():
    N = 6
    F = curve_formal_group(WeierstrassCurve.generic(), N, check_order=None)
    ours = to_sympy(F.log().log)
    z = sp.Symbol(X)
    m1, m2, m3, m4, m6 = sp.symbols("mu1 mu2 mu3 mu4 mu6")
    w = z ** 3
    for _ in range(N):
        w = sp.expand(z ** 3 + m1 * z * w + m2 * z ** 2 * w + m3 * w ** 2 + m4 * z * w ** 2 + m6 * w ** 3)
        w = sum(w.coeff(z, k) * z ** k for k in range(N + 3))
    x, y = z / w, -1 / w
    omega = sp.series(sp.diff(x, z) / (2 * y + m1 * x + m3), z, 0, N).removeO()
    oracle = sp.expand(sp.integrate(sp.expand(omega), z))
    assert sp.expand(ours - oracle) == 0


def test_cuspidal_curve_gives_additive_law():
    F = curve_formal_group(WeierstrassCurve.from_values([0, 0, 0, 0, 0]), 7)
    T = F.F.vars
    assert F.F == TruncatedSeries.variable(T, U, 7) + TruncatedSeries.variable(T, V, 7)


def test_nodal_curve_gives_multiplicative_law():
    # y^2 + x y = x^3 is the multiplicative group with parameter mu1 = 1
    F = curve_formal_group(WeierstrassCurve.from_values([1, 0, 0, 0, 0]), 6)
    T = F.F.vars
    u, v = TruncatedSeries.variable(T, U, 6), TruncatedSeries.variable(T, V, 6)
    assert F.F == u + v - u * v


@pytest.mark.parametrize("order", [6, 8])
def test_generic_law_is_integral(order):
    assert curve_formal_group(WeierstrassCurve.generic(), order).F.is_integral()


def test_law_over_prime_field():
    C = WeierstrassCurve.from_values([0, 0, 1, 0, 0], GF(2))
    F = curve_formal_group(C, 6)
    assert F.ring == GF(2)


# ---------------------------------------------------------------------------
# the two elliptic laws


@pytest.mark.parametrize("order", [6, 8])
def test_phi_law_is_integral(order):
    F = krichever_curve_fgl(order, integral=True)
    assert F.F.is_integral()
    assert F.F.is_homogeneous(1)


def test_krichever_law_is_homogeneous_of_degree_one():
    F = krichever_fgl(8)
    assert F.F.is_homogeneous(1)


def test_krichever_law_has_denominators():
    assert not krichever_fgl(6).F.is_integral()


def test_krichever_q_low_coefficients():
    Q = krichever_q(3)
    assert Q.coeff({}) == 1
    assert Q.coeff({X: 1, "a1": 1}) == -1
    assert Q.coeff({X: 2, "a1": 2}) == mpq(1, 2)
    assert Q.coeff({X: 2, "a2": 1}) == mpq(-1, 2)
    assert Q.coeff({X: 3, "a3": 1}) == mpq(1, 6)


def test_krichever_at_zero_parameters_is_additive():
    F = krichever_fgl(7)
    T = F.F.vars
    zero = {s: TruncatedSeries.zero(T) for s in ("a1", "a2", "a3", "a4")}
    G = substitute(F.F, zero, T)
    assert G == TruncatedSeries.variable(T, U, 7) + TruncatedSeries.variable(T, V, 7)


def test_krichever_exponential_starts_with_x():
    lam = krichever_exponential(5)
    assert lam.coeff({X: 1}) == 1
    assert lam.order == 5


def test_laws_differ_beyond_low_degree():
    # the curve law and the sigma law are distinct laws on different rings
    F = krichever_fgl(5).F
    G = krichever_curve_fgl(5).F
    assert F.vars != G.vars
    assert additive_fgl(5).F != F
