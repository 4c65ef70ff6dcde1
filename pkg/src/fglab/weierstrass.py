"""Weierstrass curves, their formal group laws, and the elliptic (Krichever) law.

The curve is ``y^2 + mu1 x y + mu3 y = x^3 + mu2 x^2 + mu4 x + mu6`` with
uniformizer ``z = -x/y`` and ``w = -1/y``.  In these coordinates the curve
reads ``w = z^3 + mu1 z w + mu2 z^2 w + mu3 w^2 + mu4 z w^2 + mu6 w^3`` and
the group law is expanded by chord addition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .fgl import (
    U,
    V,
    X,
    FormalGroupLaw,
    bivariate_table,
    univariate_table,
)
from .series import (
    QQ,
    SeriesError,
    TruncatedSeries,
    VarTable,
    divide_unit,
    exact_divide,
    exact_divide_linear,
    substitute,
)

MU_NAMES = ("mu1", "mu2", "mu3", "mu4", "mu6")
MU_WEIGHTS = {"mu1": -1, "mu2": -2, "mu3": -3, "mu4": -4, "mu6": -6}
A_RATIONAL = [("a1", -1), ("a2", -2), ("a3", -3), ("a4", -4)]
A_INTEGRAL = [("a1", -1), ("a2", -2), ("a3", -3), ("ab4", -4)]
"""Generators of Z[a1, a2, a3, a4/2]; ``ab4`` stands for ``a4 / 2``."""


def _poly_table(coeffs: Sequence[Tuple[str, int]]) -> VarTable:
    return VarTable.of(*coeffs)


@dataclass
class WeierstrassCurve:
    """The five coefficients as exact polynomials over a coefficient table."""

    coeffs: List[Tuple[str, int]]
    mu: Dict[str, TruncatedSeries]
    ring: object = QQ

    @property
    def table(self) -> VarTable:
        return _poly_table(self.coeffs)

    @classmethod
    def generic(cls) -> "WeierstrassCurve":
        coeffs = [(m, MU_WEIGHTS[m]) for m in MU_NAMES]
        T = _poly_table(coeffs)
        return cls(coeffs, {m: TruncatedSeries.variable(T, m) for m in MU_NAMES})

    @classmethod
    def from_values(cls, mu: Sequence, ring=QQ) -> "WeierstrassCurve":
        """A curve with scalar coefficients ``(mu1, mu2, mu3, mu4, mu6)``."""
        if len(mu) != 5:
            raise SeriesError("expected five coefficients mu1, mu2, mu3, mu4, mu6")
        T = _poly_table([])
        return cls([], {m: TruncatedSeries.constant(T, c, None, ring) for m, c in zip(MU_NAMES, mu)}, ring)

    def substitute(self, images: Dict[str, TruncatedSeries]) -> "WeierstrassCurve":
        """Apply a coefficient substitution to every ``mu``."""
        first = next(iter(images.values()))
        T = first.vars
        mu = {m: substitute(p, images, T) for m, p in self.mu.items()}
        return WeierstrassCurve([(s, w) for s, w in T.pairs()], mu, first.ring)

    def evaluate(self, point: Dict[str, object], ring) -> "WeierstrassCurve":
        """Specialise all coefficient variables to elements of ``ring``."""
        vals = []
        for m in MU_NAMES:
            ev = self.mu[m].evaluate(point)
            vals.append(sum(ev.values(), ring.coerce(0)) if ev else ring.coerce(0))
        return WeierstrassCurve.from_values(vals, ring)

    def reduce_mod(self, p: int) -> "WeierstrassCurve":
        mu = {m: q.reduce_mod(p) for m, q in self.mu.items()}
        return WeierstrassCurve(list(self.coeffs), mu, next(iter(mu.values())).ring)

    def mu_in(self, T: VarTable, order: Optional[int]) -> Dict[str, TruncatedSeries]:
        return {m: q.embed(T).with_order(order) for m, q in self.mu.items()}


# ---------------------------------------------------------------------------
# invariants


@dataclass
class CurveInvariants:
    b2: TruncatedSeries
    b4: TruncatedSeries
    b6: TruncatedSeries
    b8: TruncatedSeries
    c4: TruncatedSeries
    c6: TruncatedSeries
    delta: TruncatedSeries

    @property
    def j(self) -> Tuple[TruncatedSeries, TruncatedSeries]:
        """``j = c4^3 / delta`` kept as a (numerator, denominator) pair."""
        return self.c4 ** 3, self.delta

    def identities_hold(self) -> bool:
        return (self.b8 * 4 == self.b2 * self.b6 - self.b4 * self.b4
                and self.delta * 1728 == self.c4 ** 3 - self.c6 ** 2)


def curve_invariants(C: WeierstrassCurve) -> CurveInvariants:
    m1, m2, m3, m4, m6 = (C.mu[m] for m in MU_NAMES)
    b2 = m1 * m1 + m2 * 4
    b4 = m4 * 2 + m1 * m3
    b6 = m3 * m3 + m6 * 4
    b8 = m1 * m1 * m6 + m2 * m6 * 4 - m1 * m3 * m4 + m2 * m3 * m3 - m4 * m4
    delta = -(b2 * b2 * b8) - b4 ** 3 * 8 - b6 * b6 * 27 + b2 * b4 * b6 * 9
    c4 = b2 * b2 - b4 * 24
    c6 = -(b2 ** 3) + b2 * b4 * 36 - b6 * 216
    return CurveInvariants(b2, b4, b6, b8, c4, c6, delta)


# ---------------------------------------------------------------------------
# formal group of the curve


def curve_w_series(C: WeierstrassCurve, order: int, var: str = X) -> TruncatedSeries:
    """``w(z)`` solving the curve equation, known through degree ``order``."""
    T = univariate_table(C.coeffs, var)
    mu = C.mu_in(T, order)
    z = TruncatedSeries.variable(T, var, order, C.ring)
    z2 = z * z
    z3 = z2 * z
    w = z3
    # each pass fixes at least one more degree (w has valuation 3)
    for _ in range(max(order - 2, 1)):
        w2 = w * w
        nxt = z3 + mu["mu1"] * z * w + mu["mu2"] * z2 * w + mu["mu3"] * w2 + mu["mu4"] * z * w2 + mu["mu6"] * w2 * w
        if nxt == w:
            break
        w = nxt
    return w


def _third_point(mu, lam: TruncatedSeries, nu: TruncatedSeries, z1: TruncatedSeries, z2: TruncatedSeries):
    """Third intersection of the line ``w = lam z + nu`` with the curve.

    The cubic in ``z`` has leading coefficient ``A`` and next coefficient
    ``B``; the three roots sum to ``-B/A``.
    """
    m1, m2, m3, m4, m6 = (mu[m] for m in MU_NAMES)
    lam2 = lam * lam
    A = 1 + m2 * lam + m4 * lam2 + m6 * lam2 * lam
    B = m1 * lam + m2 * nu + m3 * lam2 + m4 * lam * nu * 2 + m6 * lam2 * nu * 3
    z3 = -z1 - z2 - divide_unit(B, A)
    w3 = lam * z3 + nu
    return z3, w3


def _negate(mu, z: TruncatedSeries, w: TruncatedSeries) -> TruncatedSeries:
    """``z``-coordinate of the negative of the point ``(z, w)``."""
    den = -1 + mu["mu1"] * z + mu["mu3"] * w
    return divide_unit(z, den)


def curve_formal_group(C: WeierstrassCurve, N: int, check_order: Optional[int] = 8) -> FormalGroupLaw:
    """Expansion of the group law of ``C`` in the uniformizer ``z``, through degree ``N``."""
    if N < 3:
        raise SeriesError("curve_formal_group needs order >= 3")
    w = curve_w_series(C, N + 1)
    T = bivariate_table(C.coeffs)
    mu = C.mu_in(T, None)
    u = TruncatedSeries.variable(T, U, N + 1, C.ring)
    v = TruncatedSeries.variable(T, V, N + 1, C.ring)
    w1 = substitute(w, {X: u}, T)
    w2 = substitute(w, {X: v}, T)
    lam = exact_divide_linear(w2 - w1, TruncatedSeries.variable(T, V, None, C.ring) - TruncatedSeries.variable(T, U, None, C.ring))
    nu = w1 - lam * u
    z3, w3 = _third_point(mu, lam, nu, u, v)
    F = _negate(mu, z3, w3).truncate(N)
    return FormalGroupLaw(F, "weierstrass", check_order)


# -- univariate point arithmetic (for height computations at points) ----------


class CurvePoints:
    """Group law on points of the formal group given by univariate series in ``x``."""

    def __init__(self, C: WeierstrassCurve, order: int):
        self.C = C
        self.order = order
        self.w = curve_w_series(C, order + 1)
        self.T = self.w.vars
        self.mu = C.mu_in(self.T, None)
        self.dw = self.w.derivative(X)
        self.x = TruncatedSeries.variable(self.T, X, order + 1, C.ring)

    def w_of(self, z: TruncatedSeries) -> TruncatedSeries:
        return substitute(self.w, {X: z}, self.T)

    def add(self, z1: TruncatedSeries, z2: TruncatedSeries) -> TruncatedSeries:
        w1, w2 = self.w_of(z1), self.w_of(z2)
        lam = exact_divide(w2 - w1, z2 - z1)
        nu = w1 - lam * z1
        z3, w3 = _third_point(self.mu, lam, nu, z1, z2)
        return _negate(self.mu, z3, w3)

    def double(self, z1: TruncatedSeries) -> TruncatedSeries:
        w1 = self.w_of(z1)
        lam = substitute(self.dw, {X: z1}, self.T)
        nu = w1 - lam * z1
        z3, w3 = _third_point(self.mu, lam, nu, z1, z1)
        return _negate(self.mu, z3, w3)

    def multiply(self, n: int) -> TruncatedSeries:
        """``[n](x)`` for ``n >= 1`` using doubling and additions of ``x``.

        An addition ``[k] + [1]`` divides by ``[k](x) - x``, whose linear
        coefficient ``k - 1`` must be a unit; doubling avoids this when
        ``n`` is even.
        """
        if n == 1:
            return self.x
        if n % 2 == 0:
            return self.compose(self.double(self.x), self.multiply(n // 2))
        return self.add(self.multiply(n - 1), self.x)

    def compose(self, f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
        """``f(g(x))``."""
        return substitute(f, {X: g}, self.T)


# ---------------------------------------------------------------------------
# the phi substitution


def phi_images(integral: bool = True) -> Dict[str, TruncatedSeries]:
    """Images of ``mu_i`` in Q[a1..a4] or (``integral``) Z[a1, a2, a3, ab4]."""
    coeffs = A_INTEGRAL if integral else A_RATIONAL
    T = _poly_table(coeffs)
    a1, a2, a3 = (TruncatedSeries.variable(T, s) for s in ("a1", "a2", "a3"))
    half_a4 = TruncatedSeries.variable(T, "ab4") if integral else TruncatedSeries.variable(T, "a4").scale(mpq(1, 2))
    return {
        "mu1": a1 * 2,
        "mu2": a2 * 3 - a1 * a1,
        "mu3": -a3,
        "mu4": -half_a4 + a2 * a2 * 3 - a1 * a3,
        "mu6": TruncatedSeries.zero(T),
    }


def phi_curve(integral: bool = True) -> WeierstrassCurve:
    return WeierstrassCurve.generic().substitute(phi_images(integral))


def krichever_curve_fgl(N: int, integral: bool = True, check_order: Optional[int] = 8) -> FormalGroupLaw:
    """The generic curve law with the phi substitution applied to its coefficients."""
    generic = curve_formal_group(WeierstrassCurve.generic(), N, check_order=None)
    images = phi_images(integral)
    T = bivariate_table(A_INTEGRAL if integral else A_RATIONAL)
    embedded = {m: p.embed(T) for m, p in images.items()}
    F = substitute(generic.F, embedded, T)
    return FormalGroupLaw(F, "weierstrass-phi", check_order)


# ---------------------------------------------------------------------------
# the Krichever elliptic law via its characteristic series


def _exp_series(h: TruncatedSeries) -> TruncatedSeries:
    """``exp(h)`` for ``h`` without constant term, over the rationals."""
    N = h.order
    out = TruncatedSeries.constant(h.vars, 1, N, h.ring)
    term = out
    for n in range(1, N + 1):
        term = (term * h).scale(mpq(1, n))
        if not term:
            break
        out = out + term
    return out


def krichever_log_q(N: int) -> TruncatedSeries:
    """``log Q(x)`` of the elliptic genus as a series over Q[a1, a2, a3, a4].

    ``Q(x) = x * exp(-a1 x) * sigma(x - z) / (sigma(x) sigma(-z)) * exp(zeta(z) x)``
    in normalised variables, with ``a2 = P(z)``, ``a3 = P'(z)``,
    ``a4 = g2 / 2``.  Expanding ``log sigma`` gives

        log Q = -a1 x + sum_{n>=2} (-(-1)^n P^{(n-2)}(z) / n! + [n even] G_n / n) x^n

    where ``P^{(j)}`` is generated by the derivation ``P -> P'``,
    ``P' -> 6 P^2 - g2/2`` and ``G_n`` are the Eisenstein values built from
    ``g2`` and ``g3 = 4 P^3 - g2 P - P'^2`` by the usual recursion.
    """
    T = _poly_table(A_RATIONAL)
    a1, a2, a3, a4 = (TruncatedSeries.variable(T, s) for s in ("a1", "a2", "a3", "a4"))
    g2 = a4 * 2
    g3 = a2 ** 3 * 4 - g2 * a2 - a3 * a3

    def D(p: TruncatedSeries) -> TruncatedSeries:
        return p.derivative("a2") * a3 + p.derivative("a3") * (a2 * a2 * 6 - a4)

    P = [a2]
    for _ in range(N):
        P.append(D(P[-1]))
    c = {1: g2.scale(mpq(1, 20)), 2: g3.scale(mpq(1, 28))}
    for k in range(3, N):
        acc = TruncatedSeries.zero(T)
        for m in range(1, k - 1):
            acc = acc + c[m] * c[k - 1 - m]
        c[k] = acc.scale(mpq(3, (2 * k + 3) * (k - 2)))
    G = {2 * k + 2: c[k].scale(mpq(1, 2 * k + 1)) for k in c}
    T1 = univariate_table(A_RATIONAL)
    out = (-TruncatedSeries.variable(T1, "a1")).shift_monomial(T1.var_key(X)).with_order(N)
    fact = 1
    for n in range(2, N + 1):
        fact *= n
        coef = P[n - 2].scale(mpq(-((-1) ** n), fact))
        if n % 2 == 0 and n in G:
            coef = coef + G[n].scale(mpq(1, n))
        out = out + coef.embed(T1).shift_monomial(T1.var_key(X, n)).with_order(N)
    return out.with_order(N)


def krichever_q(N: int) -> TruncatedSeries:
    """Characteristic series ``Q(x)`` of the elliptic genus."""
    return _exp_series(krichever_log_q(N))


def krichever_exponential(N: int) -> TruncatedSeries:
    """``lam(x) = x / Q(x)`` through degree ``N``."""
    Q = krichever_q(N - 1)
    one = TruncatedSeries.constant(Q.vars, 1, N - 1)
    return divide_unit(one, Q).with_order(N - 1).shift_monomial(Q.vars.var_key(X)).with_order(N)


def krichever_fgl(N: int, check_order: Optional[int] = 8) -> FormalGroupLaw:
    """Krichever's elliptic formal group law over Q[a1, a2, a3, a4]."""
    from .fgl import fgl_from_exponential

    if N < 3:
        raise SeriesError("krichever_fgl needs order >= 3")
    F = fgl_from_exponential(krichever_exponential(N), check_order, "krichever")
    return F


# ---------------------------------------------------------------------------
# discriminant formula


def displayed_discriminant() -> TruncatedSeries:
    """The discriminant of the phi-curve as a closed polynomial in a1..a4.

    With ``B = -4 a1 a3 - a4 + 6 a2^2``:
    ``36 B^2 a2^2 - 8 B^3 - 27 a3^4 + 108 B a2 a3^2 - 432 a2^3 a3^2``.
    """
    T = _poly_table(A_RATIONAL)
    a1, a2, a3, a4 = (TruncatedSeries.variable(T, s) for s in ("a1", "a2", "a3", "a4"))
    B = a1 * a3 * (-4) - a4 + a2 * a2 * 6
    return (B * B * a2 * a2 * 36 - B ** 3 * 8 - a3 ** 4 * 27 + B * a2 * a3 * a3 * 108
            - a2 ** 3 * a3 * a3 * 432)


@dataclass
class CheckResult:
    check: str
    status: str
    witness: object = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        return {"check": self.check, "status": self.status, "witness": self.witness, **self.details}


def discriminant_check() -> CheckResult:
    inv = curve_invariants(phi_curve(integral=False))
    target = displayed_discriminant()
    diff = inv.delta - target
    b4_ok = inv.b4 == displayed_b4()
    status = "pass" if (not diff and b4_ok) else "fail"
    witness = None if not diff else diff.to_json()
    return CheckResult("delta-check", status, witness,
                       {"terms": len(target), "b4_matches": b4_ok, "identities": inv.identities_hold()})


def displayed_b4() -> TruncatedSeries:
    T = _poly_table(A_RATIONAL)
    a1, a2, a3, a4 = (TruncatedSeries.variable(T, s) for s in ("a1", "a2", "a3", "a4"))
    return a1 * a3 * (-4) - a4 + a2 * a2 * 6
