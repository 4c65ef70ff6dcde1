"""Localized series, Quillen's pushforward formula and the flop difference.

Chern roots of the two rank-2 bundles are ``al1, al2`` and ``be1, be2``
(weight 1); FGL coefficient variables keep their own names, so the roots
never collide with coefficients such as ``a1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .fgl import U, V, X, FormalGroupLaw, fgl_apply_inverse, fgl_sum
from .series import (
    NotDivisibleError,
    SeriesError,
    TruncatedSeries,
    VarTable,
    exact_divide,
    inverse_unit,
    substitute,
)

ALPHA = ("al1", "al2")
BETA = ("be1", "be2")
ROOTS = ALPHA + BETA
TOWER_VARS = ("v", "xi")
"""``v`` is the tautological class of the middle stage, ``xi`` of the top stage."""


def flop_table(F: FormalGroupLaw, extra: Sequence[str] = ()) -> VarTable:
    return VarTable.of(*[(r, 1) for r in ROOTS + tuple(extra)], *F.coeffs)


# ---------------------------------------------------------------------------
# localized series


@dataclass(frozen=True)
class Factor:
    """A denominator factor: either a linear form or an FGL expression kept symbolically."""

    name: str
    series: TruncatedSeries
    kind: str  # "linear" or "fgl"


@dataclass
class LocalizedSeries:
    """``numerator / prod(factor_i ^ exps_i)`` with exact truncated numerator."""

    numerator: TruncatedSeries
    factors: Tuple[Factor, ...] = ()
    exps: Tuple[int, ...] = ()

    @property
    def valid_order(self) -> Optional[int]:
        return self.numerator.order

    @property
    def denominator_degree(self) -> int:
        return sum(e for e in self.exps)

    def _aligned(self, other: "LocalizedSeries"):
        names = [f.name for f in self.factors]
        facs = list(self.factors)
        for f in other.factors:
            if f.name not in names:
                names.append(f.name)
                facs.append(f)
        mine = dict(zip((f.name for f in self.factors), self.exps))
        theirs = dict(zip((f.name for f in other.factors), other.exps))
        top = [max(mine.get(n, 0), theirs.get(n, 0)) for n in names]
        return facs, top, mine, theirs

    def _raise_to(self, facs, top, have) -> TruncatedSeries:
        num = self.numerator
        for f, e in zip(facs, top):
            for _ in range(e - have.get(f.name, 0)):
                num = num * f.series
        return num

    def __add__(self, other: "LocalizedSeries") -> "LocalizedSeries":
        facs, top, mine, theirs = self._aligned(other)
        num = self._raise_to(facs, top, mine) + other._raise_to(facs, top, theirs)
        return LocalizedSeries(num, tuple(facs), tuple(top))

    def __neg__(self):
        return LocalizedSeries(-self.numerator, self.factors, self.exps)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "LocalizedSeries") -> "LocalizedSeries":
        if isinstance(other, TruncatedSeries):
            return LocalizedSeries(self.numerator * other, self.factors, self.exps)
        facs, _, mine, theirs = self._aligned(other)
        exps = tuple(mine.get(f.name, 0) + theirs.get(f.name, 0) for f in facs)
        return LocalizedSeries(self.numerator * other.numerator, tuple(facs), exps)

    def cleared(self, factors: Sequence[Factor], exps: Sequence[int]) -> TruncatedSeries:
        """Numerator over the given common denominator (must dominate ours)."""
        have = dict(zip((f.name for f in self.factors), self.exps))
        for n, e in have.items():
            if e and n not in {f.name for f in factors}:
                raise SeriesError(f"factor {n} missing from the common denominator")
        return self._raise_to(list(factors), list(exps), have)

    def normalize(self) -> "LocalizedSeries":
        """Cancel linear factors that divide the numerator exactly."""
        num = self.numerator
        exps = list(self.exps)
        for i, f in enumerate(self.factors):
            if f.kind != "linear":
                continue
            while exps[i]:
                try:
                    num = exact_divide(num, f.series)
                except NotDivisibleError:
                    break
                exps[i] -= 1
        return LocalizedSeries(num, self.factors, tuple(exps))

    def to_series(self) -> TruncatedSeries:
        """Divide out every factor exactly; raises if the element is not a power series."""
        num = self.numerator
        for f, e in zip(self.factors, self.exps):
            for _ in range(e):
                num = exact_divide(num, f.series)
        return num

    def is_zero(self) -> bool:
        return self.numerator.is_zero()


def localized(s: TruncatedSeries) -> LocalizedSeries:
    return LocalizedSeries(s)


# ---------------------------------------------------------------------------
# splitting FGL combinations


class FlopContext:
    """Cached FGL data over the flop root table."""

    def __init__(self, F: FormalGroupLaw, extra: Sequence[str] = ()):
        self.F = F
        self.T = flop_table(F, extra)
        self.ring = F.ring
        self.order = F.order
        self._diff_unit: Optional[TruncatedSeries] = None
        self._diff_unit_inv: Optional[TruncatedSeries] = None
        self._pair_T = VarTable.of((U, 1), (V, 1), *F.coeffs)

    def var(self, name: str, order: Optional[int] = "default") -> TruncatedSeries:
        o = self.order if order == "default" else order
        return TruncatedSeries.variable(self.T, name, o, self.ring)

    def linear(self, coeffs: Dict[str, int]) -> TruncatedSeries:
        terms = {self.T.var_key(n): c for n, c in coeffs.items()}
        return TruncatedSeries(self.T, terms, None, self.ring)

    def rename_pair(self, s: TruncatedSeries, x: str, y: str) -> TruncatedSeries:
        """Rename ``u, v`` of a two-variable series to root names ``x, y``."""
        return substitute(s, {U: self.var(x, None), V: self.var(y, None)}, self.T)

    def fsum(self, x: str, y: str) -> TruncatedSeries:
        return self.rename_pair(self.F.F, x, y)

    def diff_unit(self) -> TruncatedSeries:
        """``U(u, v)`` with ``u -_F v = (u - v) U(u, v)``."""
        if self._diff_unit is None:
            T = self._pair_T
            u = TruncatedSeries.variable(T, U, self.order, self.ring)
            v = TruncatedSeries.variable(T, V, self.order, self.ring)
            D = fgl_sum(self.F, u, fgl_apply_inverse(self.F, v))
            self._diff_unit = exact_divide(D, u.with_order(None) - v.with_order(None))
        return self._diff_unit

    def diff_unit_inverse(self) -> TruncatedSeries:
        if self._diff_unit_inv is None:
            self._diff_unit_inv = inverse_unit(self.diff_unit())
        return self._diff_unit_inv


def fgl_linear_split(F: FormalGroupLaw, x: TruncatedSeries, y: TruncatedSeries, sign: int = -1):
    """Split ``x -_F y`` (``sign=-1``) or ``x +_F y`` (``sign=+1``) as ``L * unit``.

    ``L`` is the linear form ``x - y`` (resp. ``x + y``).  Differences always
    split; sums split only when the law makes them divisible, otherwise
    :class:`NotDivisibleError` is raised with the obstructing monomial.
    """
    yy = fgl_apply_inverse(F, y) if sign < 0 else y
    comb = fgl_sum(F, x, yy)
    L = (x - y) if sign < 0 else (x + y)
    L = L.truncate(1).with_order(None)
    return L, exact_divide(comb, L)


def loc_invert_fgl_combo(ctx: FlopContext, x: str, y: str, sign: int) -> LocalizedSeries:
    """``1 / (x -_F y)`` or ``1 / (x +_F y)`` for root names ``x``, ``y``.

    Differences become ``U^{-1} / (x - y)`` with a linear factor; sums keep
    the full FGL expression as a symbolic factor.
    """
    one = TruncatedSeries.constant(ctx.T, 1, ctx.order, ctx.ring)
    if sign < 0:
        L = ctx.linear({x: 1, y: -1})
        inv = ctx.rename_pair(ctx.diff_unit_inverse(), x, y)
        return LocalizedSeries(inv, (Factor(f"{x}-{y}", L, "linear"),), (1,))
    S = ctx.fsum(x, y)
    return LocalizedSeries(one, (Factor(f"{x}+{y}", S, "fgl"),), (1,))


# ---------------------------------------------------------------------------
# Quillen's formula


def _linear_part(s: TruncatedSeries) -> TruncatedSeries:
    g = s.graded()
    if g.get(0):
        raise SeriesError("a Chern root must have zero constant term")
    return TruncatedSeries(s.vars, dict(g.get(1, {})), None, s.ring)


@dataclass
class QuillenInput:
    F: FormalGroupLaw
    roots: List[TruncatedSeries]
    f: TruncatedSeries
    var: str = X


def quillen_pushforward(Q: QuillenInput) -> LocalizedSeries:
    """``sum_i f(-_F l_i) / prod_{j != i} (l_j -_F l_i)`` on a common denominator.

    ``f`` is a series in ``Q.var`` whose other variables are carried by name
    into the table of the roots.  The common denominator is the product over
    pairs ``i < j`` of the linear parts of ``l_j - l_i``; each difference is
    split into that linear form times a unit.
    """
    F, roots, f = Q.F, Q.roots, Q.f
    r = len(roots)
    if r == 0:
        raise SeriesError("need at least one Chern root")
    T = roots[0].vars
    ring = F.ring
    neg = [fgl_apply_inverse(F, lam) for lam in roots]
    vals = [substitute(f, {Q.var: n}, T) for n in neg]
    if r == 1:
        return LocalizedSeries(vals[0])
    lin = {}
    inv_units = {}
    for i in range(r):
        for j in range(r):
            if i == j:
                continue
            D = fgl_sum(F, roots[j], neg[i])  # l_j -_F l_i
            L = _linear_part(D)
            if L.is_zero():
                raise SeriesError("Chern roots must be distinct as linear forms")
            unit = exact_divide(D, L)
            inv_units[(j, i)] = inverse_unit(unit)
            lin[(j, i)] = L
    pairs = [(i, j) for i in range(r) for j in range(i + 1, r)]
    factors = tuple(Factor(f"L{i}{j}", lin[(j, i)], "linear") for i, j in pairs)
    total = None
    for i in range(r):
        term = vals[i]
        for j in range(r):
            if j != i:
                term = term * inv_units[(j, i)]
        sign = 1
        for j in range(i):
            sign = -sign  # lin[(j, i)] = -lin[(i, j)] for the factor with index pair (j, i)
        for a, b in pairs:
            if i not in (a, b):
                term = term * lin[(b, a)]
        if sign < 0:
            term = -term
        total = term if total is None else total + term
    return LocalizedSeries(total, factors, tuple(1 for _ in pairs))


def pushforward_series(F: FormalGroupLaw, roots: List[TruncatedSeries], f: TruncatedSeries, var: str = X) -> TruncatedSeries:
    return quillen_pushforward(QuillenInput(F, roots, f, var)).to_series()


# ---------------------------------------------------------------------------
# the closed form


@dataclass
class FlopResult:
    """Cleared numerator of the flop difference over the six-fold denominator."""

    law: str
    numerator: TruncatedSeries
    factors: Tuple[Factor, ...]
    fgl_order: int
    margin: int

    @property
    def valid_order(self) -> int:
        return self.numerator.order

    def degree_report(self, upto: Optional[int] = None) -> List[dict]:
        top = self.valid_order if upto is None else min(upto, self.valid_order)
        graded = self.numerator.graded()
        out = []
        for d in range(top + 1):
            piece = graded.get(d, {})
            entry = {"degree": d, "numerator_zero": not piece, "nonzero_witness": None}
            if piece:
                k = min(piece, key=self.numerator.vars.unpack)
                c = piece[k]
                entry["nonzero_witness"] = {
                    "monomial": self.numerator.vars.monomial_str(k),
                    "coefficient": str(c),
                }
            out.append(entry)
        return out

    def lowest_nonzero_degree(self) -> Optional[int]:
        return self.numerator.valuation()

    def class_series(self) -> TruncatedSeries:
        """The honest power series ``X1 - X2`` (numerator divided by all six factors)."""
        return LocalizedSeries(self.numerator, self.factors, tuple(1 for _ in self.factors)).to_series()


def flop_closed_form(F: FormalGroupLaw, margin: int = 6) -> FlopResult:
    """The four-term closed form on the common denominator
    ``S11 S12 S21 S22 (al2 - al1)(be2 - be1)`` with ``Sij = al_i +_F be_j``."""
    ctx = FlopContext(F)
    S = {(i, j): ctx.fsum(ALPHA[i], BETA[j]) for i in range(2) for j in range(2)}
    LA = ctx.linear({"al2": 1, "al1": -1})
    LB = ctx.linear({"be2": 1, "be1": -1})
    Uinv = ctx.diff_unit_inverse()
    uA = ctx.rename_pair(Uinv, "al2", "al1")   # 1 / U(al2, al1)
    uA2 = ctx.rename_pair(Uinv, "al1", "al2")  # 1 / U(al1, al2)
    uB = ctx.rename_pair(Uinv, "be2", "be1")
    uB2 = ctx.rename_pair(Uinv, "be1", "be2")
    n1 = S[1, 0] * S[1, 1] * LB * uA
    n2 = -(S[0, 0] * S[0, 1] * LB * uA2)
    n3 = -(S[0, 1] * S[1, 1] * LA * uB)
    n4 = S[0, 0] * S[1, 0] * LA * uB2
    N = n1 + n2 + n3 + n4
    factors = (
        Factor("al1+be1", S[0, 0], "fgl"),
        Factor("al1+be2", S[0, 1], "fgl"),
        Factor("al2+be1", S[1, 0], "fgl"),
        Factor("al2+be2", S[1, 1], "fgl"),
        Factor("al2-al1", LA, "linear"),
        Factor("be2-be1", LB, "linear"),
    )
    return FlopResult(F.name, N, factors, F.order, margin)


def flop_closed_form_localized(F: FormalGroupLaw) -> LocalizedSeries:
    """Same expression assembled term by term through :class:`LocalizedSeries` arithmetic."""
    ctx = FlopContext(F)

    def term(sum1, sum2, diff):
        return loc_invert_fgl_combo(ctx, *sum1, 1) * loc_invert_fgl_combo(ctx, *sum2, 1) * loc_invert_fgl_combo(ctx, *diff, -1)

    t1 = term(("al1", "be1"), ("al1", "be2"), ("al2", "al1"))
    t2 = term(("al2", "be1"), ("al2", "be2"), ("al1", "al2"))
    t3 = term(("al1", "be1"), ("al2", "be1"), ("be2", "be1"))
    t4 = term(("al1", "be2"), ("al2", "be2"), ("be1", "be2"))
    return t1 + t2 - t3 - t4


# ---------------------------------------------------------------------------
# the towers


@dataclass
class TowerTerms:
    t1_ab: TruncatedSeries
    t2_b: TruncatedSeries
    t1_ba: TruncatedSeries
    t2_a: TruncatedSeries

    @property
    def difference(self) -> TruncatedSeries:
        return self.t1_ab - self.t2_b - self.t1_ba + self.t2_a

    @property
    def cancellation(self) -> TruncatedSeries:
        return self.t2_b - self.t2_a


def _tower_t1(F: FormalGroupLaw, ctx: FlopContext, base: Sequence[str], fibre: Sequence[str]) -> TruncatedSeries:
    """``P_{P(base)}(fibre (x) O(-1) + O)`` pushed to the base of the flop."""
    v = ctx.var("v")
    zero = TruncatedSeries.zero(ctx.T, ctx.order, ctx.ring)
    roots = [fgl_sum(F, ctx.var(b), fgl_apply_inverse(F, v)) for b in fibre] + [zero]
    one = TruncatedSeries.constant(ctx.T, 1, ctx.order, ctx.ring)
    g = pushforward_series(F, roots, one.with_order(ctx.order), var="xi")
    return pushforward_series(F, [ctx.var(a) for a in base], g, var="v")


def _tower_t2(F: FormalGroupLaw, ctx: FlopContext, base: Sequence[str], fibre: Sequence[str]) -> TruncatedSeries:
    """``P(O_{P(fibre (x) O(-1))}(1) + O)`` over ``P(base)``, pushed to the base of the flop."""
    xi = ctx.var("xi")
    zero = TruncatedSeries.zero(ctx.T, ctx.order, ctx.ring)
    one = TruncatedSeries.constant(ctx.T, 1, ctx.order, ctx.ring)
    top = pushforward_series(F, [xi, zero], one, var="xi")  # a series in xi
    v = ctx.var("v")
    mid_roots = [fgl_sum(F, ctx.var(b), fgl_apply_inverse(F, v)) for b in fibre]
    g = pushforward_series(F, mid_roots, top, var="xi")
    return pushforward_series(F, [ctx.var(a) for a in base], g, var="v")


def flop_via_towers(F: FormalGroupLaw) -> TowerTerms:
    """All four tower classes by iterated Quillen pushforwards."""
    ctx = FlopContext(F, TOWER_VARS)
    t1_ab = _tower_t1(F, ctx, ALPHA, BETA)
    t2_b = _tower_t2(F, ctx, ALPHA, BETA)
    t1_ba = _tower_t1(F, ctx, BETA, ALPHA)
    t2_a = _tower_t2(F, ctx, BETA, ALPHA)
    T = flop_table(F)
    return TowerTerms(*(s.restrict(T) for s in (t1_ab, t2_b, t1_ba, t2_a)))
