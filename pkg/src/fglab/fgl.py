"""Formal group laws: validation, inverses, logarithms, twists, reductions, l-series."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .series import (
    BITS,
    MASK,
    QQ,
    GF,
    SeriesError,
    TruncatedSeries,
    VarTable,
    divide_unit,
    inverse_unit,
    series_reversion,
    substitute,
    univariate_var,
)

U, V, W = "u", "v", "w"
X = "x"


class FGLValidationError(ValueError):
    """An axiom failed; ``axiom`` and ``monomial`` locate the failure."""

    def __init__(self, axiom: str, monomial, coefficient, message: str = ""):
        self.axiom = axiom
        self.monomial = monomial
        self.coefficient = coefficient
        super().__init__(message or f"{axiom} fails at monomial {monomial} (coefficient {coefficient})")


def coefficient_pairs(vars: VarTable) -> List[Tuple[str, int]]:
    """The non-positive-weight variables of a table, in order."""
    return [(s, w) for s, w in vars.pairs() if w <= 0]


def bivariate_table(coeffs: Sequence[Tuple[str, int]]) -> VarTable:
    return VarTable.of((U, 1), (V, 1), *coeffs)


def univariate_table(coeffs: Sequence[Tuple[str, int]], name: str = X) -> VarTable:
    return VarTable.of((name, 1), *coeffs)


def merge_coefficients(*pair_lists: Sequence[Tuple[str, int]]) -> List[Tuple[str, int]]:
    seen: Dict[str, int] = {}
    out = []
    for pairs in pair_lists:
        for s, w in pairs:
            if s in seen:
                if seen[s] != w:
                    raise SeriesError(f"weight clash for coefficient {s}")
                continue
            seen[s] = w
            out.append((s, w))
    return out


@dataclass
class ExponentialPair:
    """Logarithm ``g`` and exponential ``lam``, mutually inverse up to order."""

    log: TruncatedSeries
    exp: TruncatedSeries

    @property
    def var(self) -> str:
        return univariate_var(self.exp)

    @property
    def tau(self) -> List[TruncatedSeries]:
        """``tau_i`` with ``lam(x) = x + sum tau_i x^(i+1)`` as coefficient polynomials."""
        x = self.var
        return [coefficient_of(self.exp, x, i + 1) for i in range(1, self.exp.order)]

    @classmethod
    def from_exp(cls, lam: TruncatedSeries) -> "ExponentialPair":
        return cls(series_reversion(lam), lam)

    @classmethod
    def from_log(cls, g: TruncatedSeries) -> "ExponentialPair":
        return cls(g, series_reversion(g))


def coefficient_of(f: TruncatedSeries, var: str, n: int) -> TruncatedSeries:
    """Coefficient of ``var^n`` as an exact polynomial in the other variables."""
    rest = f.vars.drop([var])
    i = f.vars.index[var]
    sh = BITS * i
    out: Dict[Tuple[int, ...], object] = {}
    for k, c in f.terms.items():
        if (k >> sh) & MASK == n:
            exps = list(f.vars.unpack(k))
            del exps[i]
            out[tuple(exps)] = c
    return TruncatedSeries.from_dict(rest, out, None, f.ring)


@dataclass
class FormalGroupLaw:
    """A validated formal group law ``F(u, v)``.

    ``F`` is a series over a table whose first two variables are ``u``, ``v``
    (weight 1); all other variables are coefficient variables of weight
    ``<= 0``.
    """

    F: TruncatedSeries
    name: str = "F"
    check_order: Optional[int] = 8
    _cache: Dict[str, object] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        fgl_check(self.F, self.check_order)

    @property
    def order(self) -> int:
        return self.F.order

    @property
    def ring(self):
        return self.F.ring

    @property
    def coeffs(self) -> List[Tuple[str, int]]:
        return coefficient_pairs(self.F.vars)

    def table(self, *positive: str) -> VarTable:
        return VarTable.of(*[(p, 1) for p in positive], *self.coeffs)

    def __call__(self, x: TruncatedSeries, y: TruncatedSeries) -> TruncatedSeries:
        return fgl_sum(self, x, y)

    def inverse(self) -> TruncatedSeries:
        if "inverse" not in self._cache:
            self._cache["inverse"] = _inverse(self)
        return self._cache["inverse"]

    def log(self) -> ExponentialPair:
        if "log" not in self._cache:
            self._cache["log"] = _log(self)
        return self._cache["log"]

    def truncate(self, order: int) -> "FormalGroupLaw":
        return FormalGroupLaw(self.F.truncate(order), self.name, min(self.check_order or order, order))

    def to_json(self) -> dict:
        return {"name": self.name, "series": self.F.to_json()}


def fgl_check(F: TruncatedSeries, check_order: Optional[int] = 8) -> None:
    """Raise :class:`FGLValidationError` unless ``F`` is a formal group law up to its order."""
    vars = F.vars
    if vars.names[:2] != (U, V) or vars.weights[:2] != (1, 1):
        raise SeriesError("a formal group law needs variables u, v first, both of weight 1")
    if any(w > 0 for w in vars.weights[2:]):
        raise SeriesError("coefficient variables must have weight <= 0")
    if F.order is None or F.order < 2:
        raise SeriesError("a formal group law needs order >= 2")
    ku = vars.var_key(U)
    kv = vars.var_key(V)
    # unitality: the terms free of v must be exactly u, and symmetrically
    for k, c in sorted(F.terms.items(), key=lambda kc: vars.unpack(kc[0])):
        eu = k & MASK
        ev = (k >> BITS) & MASK
        if ev == 0 and not (k == ku and c == 1):
            raise FGLValidationError("unitality F(u,0)=u", vars.unpack(k), c)
        if eu == 0 and not (k == kv and c == 1):
            raise FGLValidationError("unitality F(0,v)=v", vars.unpack(k), c)
    if F.terms.get(ku) != 1:
        raise FGLValidationError("unitality F(u,0)=u", vars.unpack(ku), F.terms.get(ku, 0))
    # symmetry
    for k, c in F.terms.items():
        eu = k & MASK
        ev = (k >> BITS) & MASK
        swapped = k - eu - (ev << BITS) + ev + (eu << BITS)
        if F.terms.get(swapped) != c:
            raise FGLValidationError("symmetry F(u,v)=F(v,u)", vars.unpack(k), c)
    if check_order:
        _check_associativity(F, min(check_order, F.order))


def _check_associativity(F: TruncatedSeries, order: int) -> None:
    coeffs = coefficient_pairs(F.vars)
    T = VarTable.of((U, 1), (V, 1), (W, 1), *coeffs)
    Ft = F.truncate(order)
    u = TruncatedSeries.variable(T, U, order, F.ring)
    v = TruncatedSeries.variable(T, V, order, F.ring)
    w = TruncatedSeries.variable(T, W, order, F.ring)
    uv = substitute(Ft, {U: u, V: v}, T)
    vw = substitute(Ft, {U: v, V: w}, T)
    left = substitute(Ft, {U: uv, V: w}, T)
    right = substitute(Ft, {U: u, V: vw}, T)
    diff = left - right
    if diff:
        exps, c = next(iter(diff.items()))
        raise FGLValidationError("associativity F(F(u,v),w)=F(u,F(v,w))", exps, c)


def fgl_validate(F: TruncatedSeries, check_order: Optional[int] = 8, name: str = "F") -> FormalGroupLaw:
    return FormalGroupLaw(F, name, check_order)


def additive_fgl(order: int, ring=QQ) -> FormalGroupLaw:
    T = bivariate_table([])
    F = TruncatedSeries.from_dict(T, {(1, 0): 1, (0, 1): 1}, order, ring)
    return FormalGroupLaw(F, "additive")


def multiplicative_fgl(order: int, t=None, ring=QQ) -> FormalGroupLaw:
    """``u + v - t u v``; with ``t=None`` the parameter is a variable of weight -1."""
    if t is None:
        T = bivariate_table([("t", -1)])
        F = TruncatedSeries.from_dict(T, {(1, 0, 0): 1, (0, 1, 0): 1, (1, 1, 1): -1}, order, ring)
    else:
        T = bivariate_table([])
        F = TruncatedSeries.from_dict(T, {(1, 0): 1, (0, 1): 1, (1, 1): -ring.coerce(t)}, order, ring)
    return FormalGroupLaw(F, "multiplicative")


def _embed_args(F: FormalGroupLaw, x: TruncatedSeries, y: TruncatedSeries) -> VarTable:
    if x.vars != y.vars:
        raise SeriesError("fgl_sum arguments must share a variable table")
    for s, w in F.coeffs:
        if s not in x.vars.index or x.vars.weights[x.vars.index[s]] != w:
            raise SeriesError(f"coefficient variable {s} missing from argument table")
    return x.vars


def fgl_sum(F: FormalGroupLaw, x: TruncatedSeries, y: TruncatedSeries) -> TruncatedSeries:
    """``x +_F y`` by substitution; arguments must have zero constant term."""
    T = _embed_args(F, x, y)
    if x.constant_term() or y.constant_term():
        raise SeriesError("fgl_sum arguments must have zero constant term")
    return substitute(F.F, {U: x, V: y}, T)


def fgl_apply_inverse(F: FormalGroupLaw, y: TruncatedSeries) -> TruncatedSeries:
    """``iota(y)``, the formal negative of a series ``y``."""
    inv = F.inverse()
    if y.constant_term():
        raise SeriesError("argument must have zero constant term")
    return substitute(inv, {X: y}, y.vars)


def fgl_sub(F: FormalGroupLaw, x: TruncatedSeries, y: TruncatedSeries) -> TruncatedSeries:
    return fgl_sum(F, x, fgl_apply_inverse(F, y))


def fgl_inverse(F: FormalGroupLaw) -> TruncatedSeries:
    return F.inverse()


def _inverse(F: FormalGroupLaw) -> TruncatedSeries:
    """Newton iteration for ``iota`` with ``F(x, iota(x)) = 0``."""
    N = F.order
    T = univariate_table(F.coeffs)
    x = TruncatedSeries.variable(T, X, N, F.ring)
    Fv = F.F.derivative(V)
    i = -x.truncate(1)
    prec = 1
    while prec < N:
        prec = min(2 * prec, N)
        ip = i.with_order(prec)
        xp = x.truncate(prec)
        val = substitute(F.F.truncate(prec), {U: xp, V: ip}, T)
        # val has valuation >= 2, so dF/dv is only needed below degree prec - 1
        dv = substitute(Fv.with_order(prec), {U: xp, V: ip}, T)
        i = ip - divide_unit(val, dv)
    return i.truncate(N)


def _log(F: FormalGroupLaw) -> ExponentialPair:
    if F.ring.characteristic:
        raise SeriesError("a logarithm needs rational coefficients")
    T = univariate_table(F.coeffs)
    N = F.order
    x = TruncatedSeries.variable(T, X, N, F.ring)
    zero = TruncatedSeries.zero(T, N, F.ring)
    Fv = F.F.derivative(V)
    omega = substitute(Fv, {U: x, V: zero}, T)
    # dF/dv(x, 0) is known through order N - 1; g then through order N
    g = inverse_unit(omega.truncate(N - 1)).integrate(X)
    lam = series_reversion(g)
    return ExponentialPair(g, lam)


def fgl_log(F: FormalGroupLaw) -> ExponentialPair:
    return F.log()


def fgl_from_exponential(lam: TruncatedSeries, check_order: Optional[int] = 8, name: str = "from_exp") -> FormalGroupLaw:
    """``F(u, v) = lam(g(u) + g(v))`` with ``g`` the reversion of ``lam``."""
    x = univariate_var(lam)
    coeffs = coefficient_pairs(lam.vars)
    N = lam.order
    g = series_reversion(lam)
    T = bivariate_table(coeffs)
    gu = substitute(g, {x: TruncatedSeries.variable(T, U, N, lam.ring)}, T)
    gv = substitute(g, {x: TruncatedSeries.variable(T, V, N, lam.ring)}, T)
    F = substitute(lam, {x: gu + gv}, T)
    out = FormalGroupLaw(F, name, check_order)
    out._cache["log"] = ExponentialPair(_rename_univariate(g, X), _rename_univariate(lam, X))
    return out


def _rename_univariate(f: TruncatedSeries, name: str) -> TruncatedSeries:
    x = univariate_var(f)
    if x == name:
        return f
    T = univariate_table(coefficient_pairs(f.vars), name)
    return substitute(f, {x: TruncatedSeries.variable(T, name, f.order, f.ring)}, T)


def fgl_twist(F: FormalGroupLaw, tau: ExponentialPair, check_order: Optional[int] = 8) -> FormalGroupLaw:
    """``lam(F(g(u), g(v)))`` for the exponential pair ``(g, lam)``."""
    lam, g = tau.exp, tau.log
    x = univariate_var(lam)
    coeffs = merge_coefficients(F.coeffs, coefficient_pairs(lam.vars))
    if x in dict(coeffs):
        raise SeriesError(f"series variable {x} clashes with a coefficient name")
    N = min(F.order, lam.order, g.order)
    T = bivariate_table(coeffs)
    T1 = univariate_table(coeffs, x)
    lam1 = lam.embed(T1)
    g1 = g.embed(T1) if g.vars != T1 else g
    Fe = F.F.embed(T)
    gu = substitute(g1, {x: TruncatedSeries.variable(T, U, N, F.ring)}, T)
    gv = substitute(g1, {x: TruncatedSeries.variable(T, V, N, F.ring)}, T)
    inner = substitute(Fe, {U: gu, V: gv}, T)
    out = substitute(lam1, {x: inner}, T)
    return FormalGroupLaw(out, f"{F.name}^tau", check_order)


def fgl_mod_l(F: FormalGroupLaw, l: int, check_order: Optional[int] = 8) -> FormalGroupLaw:
    """Coefficientwise reduction mod the prime ``l``."""
    if F.ring != QQ:
        raise SeriesError("fgl_mod_l expects a law with rational coefficients")
    return FormalGroupLaw(F.F.reduce_mod(l), f"{F.name} mod {l}", check_order)


@dataclass
class LSeriesReport:
    l: int
    n_series: TruncatedSeries
    v: List[TruncatedSeries]

    def to_json(self) -> dict:
        return {"l": self.l, "v": [p.to_json() for p in self.v]}


def n_series(F: FormalGroupLaw, n: int, order: Optional[int] = None) -> TruncatedSeries:
    """``[n]_F(x)`` by iterated formal sums."""
    N = F.order if order is None else min(order, F.order)
    T = univariate_table(F.coeffs)
    x = TruncatedSeries.variable(T, X, N, F.ring)
    s = x
    Ft = F.F.truncate(N)
    for _ in range(n - 1):
        s = substitute(Ft, {U: s, V: x}, T)
    return s


def l_series(F: FormalGroupLaw, l: int, k: int) -> LSeriesReport:
    """``[l]_F(x)`` and ``v_0, ..., v_k`` (coefficients at ``x^(l^i)``).

    Over rational coefficients ``v_0 = l`` is returned unreduced; over
    ``GF(l)`` the series is already reduced.
    """
    need = l ** k
    if F.order < need:
        raise SeriesError(f"order {F.order} too small for depth {k} at l={l} (need {need})")
    s = n_series(F, l, need)
    vs = [coefficient_of(s, X, l ** i) for i in range(k + 1)]
    return LSeriesReport(l, s, vs)


def universal_exponential(order: int) -> TruncatedSeries:
    """``lam_b(x) = x + sum_{n>=1} b_n x^(n+1)`` over ``Q[b_1, ..., b_(order-1)]``."""
    m = max(order - 1, 0)
    coeffs = [(f"b{i}", -i) for i in range(1, m + 1)]
    T = univariate_table(coeffs)
    terms = {T.var_key(X): 1}
    for i in range(1, m + 1):
        terms[T.var_key(X, i + 1) + T.var_key(f"b{i}")] = 1
    return TruncatedSeries(T, terms, order, QQ)


def universal_fgl(order: int, check_order: Optional[int] = 8) -> FormalGroupLaw:
    return fgl_from_exponential(universal_exponential(order), check_order, "universal")
