import pytest
from gmpy2 import mpq

from fglab.series import SeriesError
from fglab.towers import (
    TangentRootList,
    TowerRing,
    base_roots,
    flop_sn_difference,
    flop_sn_formula,
    flop_tower,
    newton_class,
    projective_space_sn,
    sn_number,
    tower_build,
)


def hirzebruch(a: int):
    """``P(O + O(a))`` over ``P^1``."""
    R = TowerRing([1])
    u = R.add_stage([R.h(1).scale(a), R.zero()])
    return R, u


# ---------------------------------------------------------------------------
# relations and pushforward


def test_projective_space_over_a_point():
    R = TowerRing([])
    u = R.add_stage([R.zero()] * 4)
    assert R.dim == 3
    assert R.integrate(R.power(u, 3)) == 1
    assert R.power(u, 4).is_zero()


def test_hirzebruch_surface_intersections():
    R, u = hirzebruch(1)
    h = R.lift(R.h(1))
    assert R.integrate(R.mul(u, h)) == 1
    # u^2 = -c_1 u with c_1 = h
    assert R.integrate(R.mul(u, u)) == -1
    assert R.mul(h, h).is_zero()


def test_segre_classes_of_line_bundle_sum():
    R = TowerRing([3])
    R.add_stage([R.h(1), R.h(1)])
    h = R.lift(R.h(1))
    # s = 1 / (1 + h)^2
    expected = [1, -2, 3, -4]
    for k, e in enumerate(expected):
        assert R.segre(0, k) == R.normal_form(R.power(h, k).scale(e))
    assert R.segre(0, 4).is_zero()
    assert R.segre(0, -1).is_zero()


@pytest.mark.parametrize("i", range(0, 6))
def test_pushforward_of_powers_is_segre(i):
    R = TowerRing([4])
    u = R.add_stage([R.h(1).scale(2), R.zero(), R.h(1)])
    push = R.segre_pushforward(0, R.power(u, i))
    assert push == R.segre(0, i - 2)


def test_projection_formula():
    R = TowerRing([3, 2])
    u = R.add_stage([R.h(1), R.h(2), R.zero()])
    a = R.lift(R.h(1) + R.h(2).scale(3))
    x = R.power(u, 3) + R.mul(u, R.lift(R.h(2)))
    lhs = R.segre_pushforward(0, R.mul(a, x))
    rhs = R.mul(a, R.segre_pushforward(0, x))
    assert lhs == rhs


def test_intermediate_stage_pushforward():
    # w lives on a rank-3 bundle over P(E); pi_*(w^i) = s_(i-2) of that bundle
    R, _ = flop_tower(6, (1, 0), (0, 0))
    w = R.gen("w")
    for i in range(0, 6):
        assert R.segre_pushforward(1, R.power(w, i)) == R.segre(1, i - 2)


@pytest.mark.parametrize("i", range(2, 7))
def test_intermediate_pushforward_closed_form(i):
    # pi_*(w^i) = sum over i1 + i2 = i - 2 of (v - b1)^i1 (v - b2)^i2
    R, _ = flop_tower(8, (1, 0), (2, 1))
    h, v, w = R.lift(R.h(1)), R.gen("v"), R.gen("w")
    x1, x2 = v - h.scale(2), v - h
    expected = R.zero()
    for i1 in range(i - 1):
        expected = expected + R.mul(R.power(x1, i1), R.power(x2, i - 2 - i1))
    assert R.segre_pushforward(1, R.power(w, i)) == R.normal_form(expected)


def test_pushforward_rejects_higher_generators():
    R, _ = flop_tower(5, (1, 0), (0, 0))
    with pytest.raises(SeriesError):
        R.segre_pushforward(0, R.gen("w"))


def test_monomial_basis_matches_rank():
    R, _ = flop_tower(6, (1, 0), (0, 0))
    assert len(R.monomial_basis()) == R.rank == 4 * 2 * 3


def test_tower_build_from_callables():
    R = tower_build([2], [lambda R: [R.h(1), R.zero()], lambda R: [R.gen("u1"), R.zero(), R.zero()]])
    assert R.dim == 2 + 1 + 2
    assert [st.generator for st in R.stages] == ["u1", "u2"]


def test_stage_roots_must_have_degree_one():
    R = TowerRing([2])
    with pytest.raises(SeriesError):
        R.add_stage([R.mul(R.h(1), R.h(1))])


# ---------------------------------------------------------------------------
# s-numbers


@pytest.mark.parametrize("n", range(1, 9))
def test_sn_of_projective_space(n):
    assert projective_space_sn(n) == n + 1


def test_sn_of_p1_squared_vanishes():
    R = TowerRing([1, 1])
    assert sn_number(R, TangentRootList(base_roots(R))) == 0


def test_sn_of_projective_space_built_as_bundle():
    R = TowerRing([])
    u = R.add_stage([R.zero()] * 5)
    assert sn_number(R, TangentRootList([u] * 5)) == 5


@pytest.mark.parametrize("zeros", [0, 1, 3])
def test_sn_ignores_trivial_roots(zeros):
    R = TowerRing([3])
    roots = TangentRootList(base_roots(R)).padded(zeros)
    assert sn_number(R, roots) == 4


@pytest.mark.parametrize("a", [0, 1, 2, 3])
def test_hirzebruch_characteristic_numbers(a):
    # T = (V (x) O(1)) + T_P1 stably, so c1^2 = 8 and s_2 = c1^2 - 2 c2 = 0 for every a
    R, u = hirzebruch(a)
    h = R.lift(R.h(1))
    roots = TangentRootList([u + h.scale(a), u, h, h])
    c1 = u * 2 + h.scale(a + 2)
    assert R.integrate(R.mul(c1, c1)) == 8
    assert R.integrate(newton_class(R, roots, 2)) == 0


@pytest.mark.parametrize("n,value", [(4, 0), (5, 5), (6, 7), (7, 14), (8, 18), (9, 27), (10, 33)])
def test_flop_sn_difference(n, value):
    assert flop_sn_difference(n) == value
    assert flop_sn_formula(n) == value


def test_flop_sn_formula_general():
    assert [flop_sn_formula(n) for n in (11, 12)] == [44, 52]
    assert flop_sn_formula(4) == mpq(0)


@pytest.mark.parametrize("n", [3, 13])
def test_flop_sn_range(n):
    with pytest.raises(SeriesError):
        flop_sn_difference(n)
