import pytest
import sympy as sp
from gmpy2 import mpq
from hypothesis import given, strategies as st

from fglab.fgl import X, univariate_table
from fglab.genus import (
    W_TABLE,
    CobordismCombo,
    HoehnABCD,
    ProjProduct,
    ToddData,
    abcd_from_f,
    abcd_of,
    additive_todd_data,
    chern_numbers,
    combo_chern_numbers,
    f_from_abcd,
    genus_combo,
    genus_product,
    genus_product_direct,
    genus_projective_space,
    jacobian_determinant,
    k_formula_check,
    krichever_abcd,
    mishchenko_log,
    partitions,
    products_of_dimension,
    todd_genus_data,
    universal_todd_data,
    w_classes,
    w_table_check,
)
from fglab.series import SeriesError, TruncatedSeries, VarTable, series_reversion


def exponential_from_sympy(expr, order):
    t = sp.Symbol("t")
    ser = sp.series(expr, t, 0, order + 1).removeO()
    coeffs = [sp.Rational(ser.coeff(t, n)) for n in range(order + 1)]
    T = univariate_table([])
    return ToddData.from_exponential(
        TruncatedSeries.from_univariate(T, X, [mpq(int(c.p), int(c.q)) for c in coeffs], order))


def scalar(s: TruncatedSeries):
    return s.coeff({})


# ---------------------------------------------------------------------------
# partitions and Chern numbers


@pytest.mark.parametrize("n,count", [(1, 1), (2, 2), (3, 3), (4, 5), (5, 7), (6, 11), (8, 22)])
def test_partition_counts(n, count):
    assert len(partitions(n)) == count


def test_projective_plane_chern_numbers():
    cn = chern_numbers(ProjProduct((2,)))
    assert cn[(2,)] == 3
    assert cn[(1, 1)] == 9


def test_p2_times_p2_chern_numbers():
    cn = chern_numbers(ProjProduct((2, 2)))
    assert cn[(4,)] == 9
    assert cn[(2, 2)] == 99


def test_p2_p1_p1_chern_numbers():
    cn = chern_numbers(ProjProduct((2, 1, 1)))
    expected = {(4,): 12, (3, 1): 60, (2, 2): 96, (2, 1, 1): 204, (1, 1, 1, 1): 432}
    assert cn.values == expected


@pytest.mark.parametrize("dims", [(1,), (3,), (2, 1), (1, 1, 1), (3, 2), (4, 1, 1)])
def test_top_chern_number_is_euler_characteristic(dims):
    P = ProjProduct(dims)
    euler = 1
    for n in dims:
        euler *= n + 1
    assert chern_numbers(P)[(P.dim,)] == euler


def test_product_rejects_point_factor():
    with pytest.raises(SeriesError):
        ProjProduct((2, 0))


def test_combo_must_be_equidimensional():
    with pytest.raises(SeriesError):
        CobordismCombo([(mpq(1), ProjProduct((1,))), (mpq(1), ProjProduct((2,)))])


# ---------------------------------------------------------------------------
# genera


@pytest.mark.parametrize("n", range(1, 7))
def test_todd_genus_of_projective_space_is_one(n):
    assert scalar(genus_projective_space(todd_genus_data(8), n)) == 1


@pytest.mark.parametrize("n", range(1, 7))
def test_signature_of_projective_space(n):
    T = exponential_from_sympy(sp.tanh(sp.Symbol("t")), 8)
    expect = 1 if n % 2 == 0 else 0
    assert scalar(genus_projective_space(T, n)) == expect


@pytest.mark.parametrize("dims", [(1, 1), (2, 1), (2, 2), (3, 1, 1)])
def test_euler_characteristic_genus(dims):
    # Q(x) = 1 + x picks out the top Chern class
    t = sp.Symbol("t")
    T = exponential_from_sympy(t / (1 + t), 8)
    P = ProjProduct(dims)
    assert scalar(genus_product(T, P)) == chern_numbers(P)[(P.dim,)]


def test_additive_genus_vanishes_in_positive_dimension():
    T = additive_todd_data(6)
    assert genus_projective_space(T, 3).is_zero()


@pytest.mark.parametrize("dims", [(2, 1), (1, 1, 1), (3, 1), (2, 2)])
def test_product_genus_is_multiplicative(dims):
    T = universal_todd_data(6)
    assert genus_product(T, ProjProduct(dims)) == genus_product_direct(T, ProjProduct(dims))


def test_mishchenko_series_is_the_logarithm():
    T = universal_todd_data(5)
    g = series_reversion(T.lam.truncate(6))
    assert mishchenko_log(T) == g


# ---------------------------------------------------------------------------
# W-classes and the K formulas


def test_w_table():
    rows = w_table_check()
    assert len(rows) == sum(len(v) for v in W_TABLE.values())
    assert all(r["ok"] for r in rows)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_k_formulas_universal(d):
    assert k_formula_check(universal_todd_data(6), d)["ok"]


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_k_formula_recovers_w_values(d):
    # the genus of W_d is the d-th letter of (A, B, C, D)
    T = universal_todd_data(6)
    H = abcd_of(T)
    assert genus_combo(T, w_classes()[d - 1]) == H.as_list()[d - 1]


def test_products_of_dimension():
    assert [str(P) for P in products_of_dimension(3)] == ["P3", "P2xP1", "P1xP1xP1"]


rat = st.fractions(min_value=-20, max_value=20, max_denominator=9).map(lambda f: mpq(f.numerator, f.denominator))


@given(rat, rat, rat, rat)
def test_abcd_roundtrip(a, b, c, d):
    T = VarTable.of()
    H = HoehnABCD(*(TruncatedSeries.constant(T, v) for v in (a, b, c, d)))
    back = abcd_from_f(f_from_abcd(H))
    assert [scalar(s) for s in back.as_list()] == [a, b, c, d]


def test_krichever_abcd_values():
    rep = krichever_abcd(8)
    assert rep["ok"]
    assert [r["class"] for r in rep["rows"]] == ["W1", "W2", "W3", "W4"]


def test_elliptic_abcd_jacobian():
    T = VarTable.of(("a1", -1), ("a2", -2), ("a3", -3), ("a4", -4))
    a1, a2, a3, a4 = (TruncatedSeries.variable(T, s) for s in ("a1", "a2", "a3", "a4"))
    polys = [-(a1 * 2), a2 * 24, a3, a2 * a2 * 6 - a4]
    point = {"a1": mpq(1), "a2": mpq(2, 3), "a3": mpq(-1), "a4": mpq(5)}
    assert jacobian_determinant(polys, ["a1", "a2", "a3", "a4"], point) == 48


def test_combo_chern_numbers_linear():
    W2 = w_classes()[1]
    cn = combo_chern_numbers(W2)
    assert cn.values[(2,)] == 24
    assert cn.values[(1, 1)] == 0
