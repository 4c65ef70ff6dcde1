"""Chow rings of iterated projective bundles over products of projective spaces.

Every ring here is ``Q[h_1, ..., h_k, u_1, ..., u_s]`` modulo ``h_j^(m_j + 1)``
and one Grothendieck relation per stage,
``u^r + c_1(V) u^(r-1) + ... + c_r(V) = 0`` with ``u = c_1(O(1))`` on ``P(V)``.
With this sign ``pi_*(u^i) = s_(i-r+1)(V)``, where ``s = 1 / c(V)``.
Elements are exact polynomials (``TruncatedSeries`` with order ``None``)
kept in normal form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .series import QQ, SeriesError, TruncatedSeries, VarTable


@dataclass
class Stage:
    rank: int
    roots: List[TruncatedSeries]
    generator: str
    chern: List[TruncatedSeries] = field(default_factory=list)


class TowerRing:
    """Base ``P^(m_1) x ... x P^(m_k)`` followed by projective-bundle stages."""

    def __init__(self, base_dims: Sequence[int]):
        if any(m < 0 for m in base_dims):
            raise SeriesError("base dimensions must be non-negative")
        self.base_dims = tuple(base_dims)
        self.stages: List[Stage] = []
        self.vars = VarTable.of(*[(f"h{j + 1}", 1) for j in range(len(base_dims))])

    # -- construction --------------------------------------------------------

    def h(self, j: int) -> TruncatedSeries:
        return TruncatedSeries.variable(self.vars, f"h{j}")

    def gen(self, name: str) -> TruncatedSeries:
        return TruncatedSeries.variable(self.vars, name)

    def const(self, c) -> TruncatedSeries:
        return TruncatedSeries.constant(self.vars, c)

    def zero(self) -> TruncatedSeries:
        return TruncatedSeries.zero(self.vars)

    def lift(self, x: TruncatedSeries) -> TruncatedSeries:
        return x.embed(self.vars) if x.vars != self.vars else x

    def add_stage(self, roots: Sequence[TruncatedSeries], name: Optional[str] = None) -> TruncatedSeries:
        """Projectivize the bundle with the given Chern roots; returns its ``u``."""
        r = len(roots)
        if r < 1:
            raise SeriesError("a projective bundle needs rank >= 1")
        roots = [self.lift(x) for x in roots]
        for x in roots:
            if not x.is_homogeneous(1) or x.free_vars() and any(s not in self.vars.index for s in x.free_vars()):
                raise SeriesError("Chern roots must be degree-1 elements of the ring so far")
        name = name or f"u{len(self.stages) + 1}"
        if name in self.vars.index:
            raise SeriesError(f"generator {name} already exists")
        self.vars = self.vars.extend([(name, 1)])
        roots = [x.embed(self.vars) for x in roots]
        for st in self.stages:
            st.roots = [x.embed(self.vars) for x in st.roots]
            st.chern = [c.embed(self.vars) for c in st.chern]
        chern = _elementary(roots, self.const(1))
        stage = Stage(r, roots, name, [self.normal_form(c) for c in chern])
        self.stages.append(stage)
        return self.gen(name)

    @property
    def dim(self) -> int:
        return sum(self.base_dims) + sum(st.rank - 1 for st in self.stages)

    @property
    def rank(self) -> int:
        out = 1
        for m in self.base_dims:
            out *= m + 1
        for st in self.stages:
            out *= st.rank
        return out

    # -- normal form ---------------------------------------------------------

    def normal_form(self, x: TruncatedSeries, upto_stage: Optional[int] = None) -> TruncatedSeries:
        x = self.lift(x)
        n_stages = len(self.stages) if upto_stage is None else upto_stage
        for s in range(n_stages - 1, -1, -1):
            x = self._reduce_stage(x, s)
        return self._reduce_base(x)

    def _reduce_stage(self, x: TruncatedSeries, s: int) -> TruncatedSeries:
        st = self.stages[s]
        i = self.vars.index[st.generator]
        r = st.rank
        rel = [c for c in st.chern[1:]]  # u^r = -(c_1 u^(r-1) + ... + c_r)
        u = self.gen(st.generator)
        while True:
            high = {k: c for k, c in x.terms.items() if self.vars.exponent(k, i) >= r}
            if not high:
                return x
            low = {k: c for k, c in x.terms.items() if k not in high}
            out = TruncatedSeries(self.vars, low, None, QQ, _trusted=True)
            for k, c in high.items():
                e = self.vars.exponent(k, i)
                rest = TruncatedSeries(self.vars, {k - self.vars.var_key(st.generator, r): c}, None, QQ, _trusted=True)
                repl = self.zero()
                for j, cj in enumerate(rel, start=1):
                    repl = repl - cj * u ** (r - j)
                out = out + rest * repl
            x = out

    def _reduce_base(self, x: TruncatedSeries) -> TruncatedSeries:
        keep = {}
        for k, c in x.terms.items():
            if all(self.vars.exponent(k, j) <= m for j, m in enumerate(self.base_dims)):
                keep[k] = c
        return TruncatedSeries(self.vars, keep, None, QQ, _trusted=True)

    def mul(self, x: TruncatedSeries, y: TruncatedSeries) -> TruncatedSeries:
        return self.normal_form(self.lift(x) * self.lift(y))

    def power(self, x: TruncatedSeries, n: int) -> TruncatedSeries:
        out = self.const(1)
        for _ in range(n):
            out = self.mul(out, x)
        return out

    def monomial_basis(self) -> List[Tuple[int, ...]]:
        bounds = [m + 1 for m in self.base_dims] + [st.rank for st in self.stages]
        out: List[Tuple[int, ...]] = [()]
        for b in bounds:
            out = [e + (i,) for e in out for i in range(b)]
        return out

    # -- pushforward and evaluation ------------------------------------------

    def segre(self, s: int, k: int) -> TruncatedSeries:
        """``s_k`` of the bundle of stage ``s`` (``s = 1 / c``); zero for ``k < 0``."""
        if k < 0:
            return self.zero()
        st = self.stages[s]
        seg = [self.const(1)]
        for j in range(1, k + 1):
            acc = self.zero()
            for i in range(1, min(j, st.rank) + 1):
                acc = acc - st.chern[i] * seg[j - i]
            seg.append(self.normal_form(acc, s))
        return seg[k]

    def segre_pushforward(self, stage: int, x: TruncatedSeries) -> TruncatedSeries:
        """Push an element down from stage ``stage`` (0-based) to the ring below it."""
        if not 0 <= stage < len(self.stages):
            raise SeriesError(f"stage index {stage} invalid")
        x = self.lift(x)
        for later in self.stages[stage + 1:]:
            if any(x.vars.exponent(k, self.vars.index[later.generator]) for k in x.terms):
                raise SeriesError("element involves generators above the stage")
        x = self.normal_form(x, stage + 1)
        st = self.stages[stage]
        i = self.vars.index[st.generator]
        out = self.zero()
        by_power: Dict[int, Dict[int, object]] = {}
        for k, c in x.terms.items():
            e = self.vars.exponent(k, i)
            by_power.setdefault(e, {})[k - self.vars.var_key(st.generator, e) if e else k] = c
        for e, terms in by_power.items():
            coef = TruncatedSeries(self.vars, terms, None, QQ, _trusted=True)
            out = out + coef * self.segre(stage, e - st.rank + 1)
        return self.normal_form(out, stage)

    def push_to_base(self, x: TruncatedSeries) -> TruncatedSeries:
        x = self.normal_form(x)
        for s in range(len(self.stages) - 1, -1, -1):
            x = self.segre_pushforward(s, x)
        return x

    def base_degree(self, x: TruncatedSeries) -> mpq:
        """Coefficient of ``h_1^(m_1) ... h_k^(m_k)``."""
        exps = [0] * self.vars.n
        for j, m in enumerate(self.base_dims):
            exps[j] = m
        return mpq(self.lift(x).coeff(tuple(exps)))

    def integrate(self, x: TruncatedSeries) -> mpq:
        return self.base_degree(self.push_to_base(x))

    def top_monomial_coefficient(self, x: TruncatedSeries) -> mpq:
        """Coefficient of the top basis monomial ``h^m * prod u_s^(r_s - 1)`` in normal form."""
        exps = list(self.base_dims) + [st.rank - 1 for st in self.stages]
        return mpq(self.normal_form(x).coeff(tuple(exps)))


def _elementary(roots: Sequence[TruncatedSeries], one: TruncatedSeries) -> List[TruncatedSeries]:
    e = [one]
    for x in roots:
        new = [e[0]]
        for i in range(1, len(e)):
            new.append(e[i] + x * e[i - 1])
        new.append(x * e[-1])
        e = new
    return e


def tower_build(base_dims: Sequence[int], stages: Sequence) -> TowerRing:
    """Build a tower from callables: each stage maps the ring so far to a list of Chern roots."""
    R = TowerRing(base_dims)
    for st in stages:
        R.add_stage(st(R))
    return R


# ---------------------------------------------------------------------------
# tangent roots and Newton-class Chern numbers


@dataclass
class TangentRootList:
    roots: List[TruncatedSeries]

    def padded(self, zeros: int) -> "TangentRootList":
        if not self.roots:
            return self
        z = TruncatedSeries.zero(self.roots[0].vars)
        return TangentRootList(self.roots + [z] * zeros)


def newton_class(R: TowerRing, roots: TangentRootList, n: int) -> TruncatedSeries:
    out = R.zero()
    for x in roots.roots:
        out = out + R.power(x, n)
    return out


def sn_number(R: TowerRing, roots: TangentRootList) -> mpq:
    n = R.dim
    for x in roots.roots:
        if not R.lift(x).is_homogeneous(1) and not R.lift(x).is_zero():
            raise SeriesError("tangent roots must have degree 1")
    return R.integrate(newton_class(R, roots, n))


def projective_space_roots(R: TowerRing, j: int) -> List[TruncatedSeries]:
    """Stable tangent roots of the ``j``-th base factor: ``m_j + 1`` copies of ``h_j``."""
    return [R.h(j)] * (R.base_dims[j - 1] + 1)


def base_roots(R: TowerRing) -> List[TruncatedSeries]:
    out: List[TruncatedSeries] = []
    for j in range(1, len(R.base_dims) + 1):
        out += projective_space_roots(R, j)
    return out


def projective_space_sn(n: int) -> mpq:
    R = TowerRing([n])
    return sn_number(R, TangentRootList(base_roots(R)))


# ---------------------------------------------------------------------------
# the flop towers


def flop_tower(n: int, first: Tuple[int, int], second: Tuple[int, int]) -> Tuple[TowerRing, TangentRootList]:
    """``P_{P(E)}(G (x) O(-1) + O)`` over ``Z = P^(n-3)``.

    ``first`` and ``second`` are the twists of the two line summands of ``E``
    and ``G`` (each summand is ``O(k h)``).
    """
    R = TowerRing([n - 3])
    h = R.h(1)
    e_roots = [h.scale(k) for k in first]
    g_roots = [h.scale(k) for k in second]
    v = R.add_stage(e_roots, "v")
    e_roots = [R.lift(x) for x in e_roots]
    g_roots = [R.lift(x) for x in g_roots]
    mid = [x - v for x in g_roots] + [R.zero()]
    w = R.add_stage(mid, "w")
    roots = [R.lift(x) + w for x in mid] + [R.lift(x) + R.lift(v) for x in e_roots] + [R.lift(x) for x in base_roots(R)]
    return R, TangentRootList(roots)


def flop_sn_formula(n: int) -> mpq:
    return mpq(n * n - 3 * n - 2 + 2 * (-1) ** (n - 1), 2)


def flop_sn_difference(n: int) -> mpq:
    """``s^n`` of ``P_{P(A)}(B(-1) + O)`` minus that of ``P_{P(B)}(A(-1) + O)``,
    with ``A = O(1) + O`` and ``B = O + O`` over ``P^(n-3)``."""
    if not 4 <= n <= 12:
        raise SeriesError("flop_sn_difference needs 4 <= n <= 12")
    A, B = (1, 0), (0, 0)
    R1, r1 = flop_tower(n, A, B)
    R2, r2 = flop_tower(n, B, A)
    return sn_number(R1, r1) - sn_number(R2, r2)
