"""Hirzebruch genera, Chern numbers of products of projective spaces, W-classes and K-formulas."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .fgl import X, coefficient_of, coefficient_pairs, universal_exponential, univariate_table
from .series import QQ, SeriesError, TruncatedSeries, VarTable, divide_unit, exact_divide

MAX_CHERN_DIM = 8


def partitions(n: int, max_part: Optional[int] = None) -> List[Tuple[int, ...]]:
    """Partitions of ``n`` as non-increasing tuples."""
    if max_part is None:
        max_part = n
    if n == 0:
        return [()]
    out = []
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            out.append((first,) + rest)
    return out


# ---------------------------------------------------------------------------
# Todd data


@dataclass
class ToddData:
    """Exponential ``lam`` and characteristic series ``Q = x / lam``."""

    lam: TruncatedSeries
    Q: TruncatedSeries

    @classmethod
    def from_exponential(cls, lam: TruncatedSeries) -> "ToddData":
        x = lam.vars.names[lam.vars.positive[0]]
        one = TruncatedSeries.constant(lam.vars, 1, None, lam.ring)
        Q = exact_divide(TruncatedSeries.variable(lam.vars, x, lam.order, lam.ring), lam)
        return cls(lam, Q)

    @property
    def order(self) -> int:
        return self.Q.order

    @property
    def coeff_table(self) -> VarTable:
        return VarTable.of(*coefficient_pairs(self.Q.vars))

    def f(self, i: int) -> TruncatedSeries:
        return coefficient_of(self.Q, self.var, i)

    @property
    def var(self) -> str:
        return self.Q.vars.names[self.Q.vars.positive[0]]


def todd_genus_data(order: int) -> ToddData:
    """``lam(x) = 1 - e^{-x}``, whose genus is the Todd genus."""
    T = univariate_table([])
    fact = 1
    coeffs = [0]
    for n in range(1, order + 1):
        fact *= n
        coeffs.append(mpq((-1) ** (n + 1), fact))
    return ToddData.from_exponential(TruncatedSeries.from_univariate(T, X, coeffs, order))


def additive_todd_data(order: int) -> ToddData:
    T = univariate_table([])
    return ToddData.from_exponential(TruncatedSeries.variable(T, X, order))


def universal_todd_data(order: int) -> ToddData:
    return ToddData.from_exponential(universal_exponential(order + 1))


def krichever_todd_data(order: int) -> ToddData:
    """Todd data of the elliptic law, read off from its logarithm."""
    from .weierstrass import krichever_fgl

    F = krichever_fgl(order + 1, check_order=None)
    return ToddData.from_exponential(F.log().exp)


# ---------------------------------------------------------------------------
# products of projective spaces and their Chern numbers


@dataclass(frozen=True)
class ProjProduct:
    dims: Tuple[int, ...]

    def __post_init__(self):
        if not self.dims or any(n < 1 for n in self.dims):
            raise SeriesError("projective factors need dimension >= 1")
        object.__setattr__(self, "dims", tuple(sorted(self.dims, reverse=True)))

    @property
    def dim(self) -> int:
        return sum(self.dims)

    def __str__(self):
        return "x".join(f"P{n}" for n in self.dims)


@dataclass
class CobordismCombo:
    terms: List[Tuple[mpq, ProjProduct]]

    def __post_init__(self):
        dims = {p.dim for _, p in self.terms}
        if len(dims) > 1:
            raise SeriesError("a cobordism combination must be equidimensional")

    @property
    def dim(self) -> int:
        return self.terms[0][1].dim if self.terms else 0


@dataclass
class ChernNumberVector:
    dim: int
    values: Dict[Tuple[int, ...], int]

    def __getitem__(self, I: Tuple[int, ...]):
        return self.values[tuple(sorted(I, reverse=True))]


def _product_table(P: ProjProduct) -> VarTable:
    return VarTable.of(*[(f"h{i}", 1) for i in range(len(P.dims))])


def _reduce_product(s: TruncatedSeries, dims: Sequence[int]) -> TruncatedSeries:
    """Impose ``h_i^(n_i + 1) = 0``."""
    out = {}
    for k, c in s.terms.items():
        exps = s.vars.unpack(k)
        if all(e <= n for e, n in zip(exps, dims)):
            out[k] = c
    return TruncatedSeries(s.vars, out, s.order, s.ring, _trusted=True)


def _top_coefficient(s: TruncatedSeries, dims: Sequence[int]):
    return s.coeff(tuple(dims))


@lru_cache(maxsize=None)
def _chern_classes(dims: Tuple[int, ...]) -> Tuple[TruncatedSeries, ...]:
    P = ProjProduct(dims)
    T = _product_table(P)
    d = P.dim
    total = TruncatedSeries.constant(T, 1, d)
    for i, n in enumerate(P.dims):
        h = TruncatedSeries.variable(T, f"h{i}", d)
        total = _reduce_product(total * (1 + h) ** (n + 1), P.dims)
    g = total.graded()
    return tuple(TruncatedSeries(T, dict(g.get(j, {})), d, QQ, _trusted=True) for j in range(d + 1))


def chern_numbers(P: ProjProduct) -> ChernNumberVector:
    if P.dim > MAX_CHERN_DIM:
        raise SeriesError(f"total dimension {P.dim} exceeds the cap {MAX_CHERN_DIM}")
    c = _chern_classes(P.dims)
    vals = {}
    for I in partitions(P.dim):
        prod = TruncatedSeries.constant(c[0].vars, 1, P.dim)
        for i in I:
            prod = _reduce_product(prod * c[i], P.dims)
        vals[I] = int(_top_coefficient(prod, P.dims))
    return ChernNumberVector(P.dim, vals)


def combo_chern_numbers(X: CobordismCombo) -> ChernNumberVector:
    d = X.dim
    vals = {I: mpq(0) for I in partitions(d)}
    for coef, P in X.terms:
        cn = chern_numbers(P)
        for I in vals:
            vals[I] += coef * cn.values[I]
    return ChernNumberVector(d, vals)


# ---------------------------------------------------------------------------
# genera


def genus_projective_space(T: ToddData, n: int) -> TruncatedSeries:
    """Coefficient of ``h^n`` in ``Q(h)^(n+1)``, as a coefficient polynomial."""
    if n > T.order:
        raise SeriesError(f"ToddData of order {T.order} cannot evaluate P^{n}")
    if n == 0:
        return TruncatedSeries.constant(T.coeff_table, 1)
    Qn = T.Q.truncate(n) ** (n + 1)
    return coefficient_of(Qn, T.var, n)


def genus_product(T: ToddData, P: ProjProduct) -> TruncatedSeries:
    val = TruncatedSeries.constant(T.coeff_table, 1)
    for n in P.dims:
        val = val * genus_projective_space(T, n)
    return val


def genus_product_direct(T: ToddData, P: ProjProduct) -> TruncatedSeries:
    """Top coefficient of ``prod Q(h_i)^(n_i + 1)`` computed in the quotient ring."""
    coeffs = coefficient_pairs(T.Q.vars)
    names = [f"h{i}" for i in range(len(P.dims))]
    table = VarTable.of(*[(s, 1) for s in names], *coeffs)
    d = P.dim
    total = TruncatedSeries.constant(table, 1, d, T.Q.ring)
    from .series import substitute

    for s, n in zip(names, P.dims):
        Qh = substitute(T.Q.truncate(d), {T.var: TruncatedSeries.variable(table, s, d)}, table)
        total = _reduce_product(total * Qh ** (n + 1), list(P.dims) + [10 ** 6] * len(coeffs))
    out = {}
    for k, c in total.terms.items():
        exps = table.unpack(k)
        if tuple(exps[: len(names)]) == tuple(P.dims):
            out[tuple(exps[len(names):])] = c
    return TruncatedSeries.from_dict(VarTable.of(*coeffs), out)


def genus_combo(T: ToddData, X: CobordismCombo) -> TruncatedSeries:
    val = TruncatedSeries.zero(T.coeff_table)
    for coef, P in X.terms:
        val = val + genus_product(T, P).scale(coef)
    return val


# ---------------------------------------------------------------------------
# W-classes


def _combo(*pairs) -> CobordismCombo:
    return CobordismCombo([(mpq(c), ProjProduct(tuple(d))) for c, d in pairs])


def w_classes() -> List[CobordismCombo]:
    W1 = _combo((1, (1,)))
    W2 = _combo((-16, (2,)), (18, (1, 1)))
    W3 = _combo(("3/2", (3,)), (-4, (2, 1)), ("5/2", (1, 1, 1)))
    W4 = _combo((-4, (4,)), ("25/2", (3, 1)), (6, (2, 2)), (-26, (2, 1, 1)), ("23/2", (1, 1, 1, 1)))
    return [W1, W2, W3, W4]


W_TABLE: Dict[int, Dict[Tuple[int, ...], int]] = {
    1: {(1,): 2},
    2: {(1, 1): 0, (2,): 24},
    3: {(1, 1, 1): 0, (2, 1): 0, (3,): 2},
    4: {(1, 1, 1, 1): 0, (2, 1, 1): 0, (2, 2): 2, (3, 1): 0, (4,): 6},
}
"""Defining Chern numbers of the W-classes, keyed by partition."""


def w_table_check() -> List[dict]:
    rows = []
    for d, W in enumerate(w_classes(), start=1):
        cn = combo_chern_numbers(W)
        for I, expect in W_TABLE[d].items():
            got = cn.values[I]
            rows.append({"class": f"W{d}", "partition": list(I), "expected": expect, "value": str(got),
                         "ok": got == expect})
    return rows


# ---------------------------------------------------------------------------
# the f <-> (A, B, C, D) relations and the K formulas


@dataclass
class HoehnABCD:
    A: TruncatedSeries
    B: TruncatedSeries
    C: TruncatedSeries
    D: TruncatedSeries

    def as_list(self):
        return [self.A, self.B, self.C, self.D]


def f_from_abcd(H: HoehnABCD) -> List[TruncatedSeries]:
    A, B, C, D = H.as_list()
    f1 = A.scale(mpq(1, 2))
    f2 = (A * A * 6 - B).scale(mpq(1, 48))
    f3 = (A ** 3 * 2 - A * B + C * 16).scale(mpq(1, 96))
    f4 = (A ** 4 * 60 - A * A * B * 60 + A * C * 1920 + B * B * 7 - D * 1152).scale(mpq(1, 2 ** 9 * 9 * 5))
    return [f1, f2, f3, f4]


def abcd_from_f(fs: Sequence[TruncatedSeries]) -> HoehnABCD:
    """Triangular inversion of :func:`f_from_abcd`."""
    f1, f2, f3, f4 = fs
    A = f1 * 2
    B = A * A * 6 - f2 * 48
    C = (f3 * 96 - A ** 3 * 2 + A * B).scale(mpq(1, 16))
    D = (A ** 4 * 60 - A * A * B * 60 + A * C * 1920 + B * B * 7 - f4 * (2 ** 9 * 9 * 5)).scale(mpq(1, 1152))
    return HoehnABCD(A, B, C, D)


def abcd_of(T: ToddData) -> HoehnABCD:
    if T.order < 4:
        raise SeriesError("need ToddData of order >= 4")
    return abcd_from_f([T.f(i) for i in range(1, 5)])


def k_formula(H: HoehnABCD, cn: ChernNumberVector) -> TruncatedSeries:
    """``K_d`` evaluated on the Chern numbers of a ``d``-fold (``d <= 4``)."""
    A, B, C, D = H.as_list()
    c = cn.values
    d = cn.dim
    if d == 1:
        return A.scale(mpq(1, 2) * c[(1,)])
    if d == 2:
        return ((A * A * 6 - B).scale(c[(1, 1)]) + B.scale(2 * c[(2,)])).scale(mpq(1, 48))
    if d == 3:
        return ((A ** 3 * 2 - A * B + C * 16).scale(c[(1, 1, 1)])
                + (A * B * 2 - C * 48).scale(c[(2, 1)])
                + C.scale(48 * c[(3,)])).scale(mpq(1, 96))
    if d == 4:
        B2 = B * B
        return ((A ** 4 * 60 - A * A * B * 60 + A * C * 1920 + B2 * 7 - D * 1152).scale(c[(1, 1, 1, 1)])
                + (B2 * 24 - D * 2304).scale(c[(2, 2)])
                + (A * A * B * 120 - A * C * 5760 - B2 * 28 + D * 4608).scale(c[(2, 1, 1)])
                + (A * C * 5760 + B2 * 8 - D * 4608).scale(c[(3, 1)])
                + (-B2 * 8 + D * 4608).scale(c[(4,)])).scale(mpq(1, 2 ** 9 * 9 * 5))
    raise SeriesError("K formulas are available for d <= 4")


def products_of_dimension(d: int) -> List[ProjProduct]:
    return [ProjProduct(p) for p in partitions(d)]


def k_formula_check(T: ToddData, d: int) -> dict:
    H = abcd_of(T)
    rows = []
    ok = True
    for P in products_of_dimension(d):
        k = k_formula(H, chern_numbers(P))
        g = genus_product(T, P)
        match = (k - g).is_zero()
        ok &= match
        rows.append({"product": str(P), "match": match})
    return {"dim": d, "ok": ok, "rows": rows}


def krichever_abcd(order: int = 10) -> dict:
    """Genus images of the W-classes under the elliptic genus versus their expected values."""
    T = krichever_todd_data(max(order, 5))
    tab = T.coeff_table
    a1, a2, a3, a4 = (TruncatedSeries.variable(tab, s) for s in ("a1", "a2", "a3", "a4"))
    expected = [-(a1 * 2), a2 * 24, a3, a2 * a2 * 6 - a4]
    rows = []
    ok = True
    for i, (W, e) in enumerate(zip(w_classes(), expected), start=1):
        val = genus_combo(T, W)
        match = (val - e).is_zero()
        ok &= match
        rows.append({"class": f"W{i}", "value": val.to_str(), "expected": e.to_str(), "match": match})
    return {"ok": ok, "rows": rows}


def mishchenko_log(T: ToddData) -> TruncatedSeries:
    """``sum_n genus(P^n) x^(n+1) / (n+1)``; agrees with the logarithm."""
    out = TruncatedSeries.zero(T.Q.vars, T.order + 1)
    for n in range(T.order + 1):
        g = genus_projective_space(T, n).embed(T.Q.vars)
        out = out + g.shift_monomial(T.Q.vars.var_key(T.var, n + 1)).scale(mpq(1, n + 1))
    return out.with_order(T.order + 1)


def jacobian_determinant(polys: Sequence[TruncatedSeries], names: Sequence[str], point: Dict[str, mpq]) -> mpq:
    """Determinant of the Jacobian matrix of ``polys`` at a rational point."""
    rows = []
    for p in polys:
        row = []
        for s in names:
            ev = p.derivative(s).evaluate(point)
            row.append(sum((mpq(v) for v in ev.values()), mpq(0)))
        rows.append(row)
    return _det(rows)


def _det(m: List[List[mpq]]) -> mpq:
    m = [list(r) for r in m]
    n = len(m)
    det = mpq(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if m[r][i]), None)
        if piv is None:
            return mpq(0)
        if piv != i:
            m[i], m[piv] = m[piv], m[i]
            det = -det
        det *= m[i][i]
        for r in range(i + 1, n):
            fac = m[r][i] / m[i][i]
            for c in range(i, n):
                m[r][c] -= fac * m[i][c]
    return det
