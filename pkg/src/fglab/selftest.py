"""Seeded randomized self-test of the series kernel and the formal group law layer."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List

from gmpy2 import mpq

from .fgl import (
    U,
    V,
    X,
    ExponentialPair,
    additive_fgl,
    fgl_twist,
    multiplicative_fgl,
    univariate_table,
    universal_fgl,
)
from .series import QQ, TruncatedSeries, VarTable, divide_unit, series_reversion, substitute

TABLE = VarTable.of(("x", 1), ("y", 1), ("c", -1), ("d", 0))


def random_series(rng: random.Random, vars: VarTable = TABLE, order: int = 5, terms: int = 8,
                  unit: bool = False) -> TruncatedSeries:
    out: Dict[tuple, mpq] = {}
    n = len(vars.names)
    for _ in range(terms):
        exps = tuple(rng.randint(0, 2) for _ in range(n))
        out[exps] = mpq(rng.randint(-5, 5), rng.randint(1, 4))
    s = TruncatedSeries.from_dict(vars, out, order)
    if unit:
        s = s - s.degree_zero_part() + 1
    return s


def random_univariate(rng: random.Random, order: int = 7) -> TruncatedSeries:
    """``x + higher terms`` over Q with one coefficient variable ``c``."""
    T = univariate_table([("c", -1)])
    coeffs = {(1, 0): mpq(1)}
    for n in range(2, order + 1):
        coeffs[(n, rng.randint(0, 1))] = mpq(rng.randint(-3, 3), rng.randint(1, 3))
    return TruncatedSeries.from_dict(T, coeffs, order)


def twisted_additive_law(order: int) -> TruncatedSeries:
    """Additive law twisted by ``lam_t(u) = (1 - e^(-t u)) / t``."""
    T = univariate_table([("t", -1)])
    coeffs = {}
    fact = 1
    for n in range(1, order + 1):
        fact *= n
        coeffs[(n, n - 1)] = mpq((-1) ** (n + 1), fact)
    lam = TruncatedSeries.from_dict(T, coeffs, order)
    return fgl_twist(additive_fgl(order), ExponentialPair.from_exp(lam)).F


@dataclass
class SelfTestReport:
    results: Dict[str, bool] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.results.values())

    def record(self, name: str, ok: bool):
        self.results[name] = self.results.get(name, True) and ok
        if not ok:
            self.failures.append(name)


def run_selftest(seed: int = 0, trials: int = 20) -> SelfTestReport:
    rng = random.Random(seed)
    rep = SelfTestReport()
    for _ in range(trials):
        a, b, c = (random_series(rng) for _ in range(3))
        rep.record("ring: commutativity", a * b == b * a and a + b == b + a)
        rep.record("ring: associativity", (a * b) * c == a * (b * c) and (a + b) + c == a + (b + c))
        rep.record("ring: distributivity", a * (b + c) == a * b + a * c)
        rep.record("ring: additive inverse", (a - a).is_zero())
        u = random_series(rng, unit=True)
        rep.record("ring: unit division", (divide_unit(a, u) * u) == a)
        k = rng.randint(1, 4)
        rep.record("truncation coherence", (a * b).truncate(k) == a.truncate(k) * b.truncate(k))
        f = random_univariate(rng)
        g = series_reversion(f)
        T = f.vars
        rep.record("reversion round trip",
                   substitute(f, {X: g}, T) == TruncatedSeries.variable(T, X, f.order)
                   and substitute(g, {X: f}, T) == TruncatedSeries.variable(T, X, f.order))
    F = universal_fgl(7, check_order=None)
    pair = F.log()
    T = F.F.vars
    gu = substitute(pair.log, {X: TruncatedSeries.variable(T, U, F.order)}, T)
    gv = substitute(pair.log, {X: TruncatedSeries.variable(T, V, F.order)}, T)
    gF = substitute(pair.log, {X: F.F}, T)
    rep.record("log/exp duality", gF == gu + gv)
    Tl = pair.log.vars
    rep.record("log/exp inverse", substitute(pair.exp, {X: pair.log}, Tl) == TruncatedSeries.variable(Tl, X, pair.log.order))
    tw = twisted_additive_law(7)
    mult = multiplicative_fgl(7).F
    rep.record("twist identity", tw.embed(mult.vars) == mult if tw.vars != mult.vars else tw == mult)
    return rep
