"""Height probes for the elliptic formal group law at small primes.

The probes work with the integral law obtained from the generic Weierstrass
law by the phi substitution, over ``Z[a1, a2, a3, ab4]`` (``ab4 = a4 / 2``).
The height of a formal group does not change under isomorphism, so the
``v_n`` read off from this law are the relevant ones up to units.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .fgl import X, coefficient_of, l_series
from .finite_fields import FqElem, GFq
from .series import GF, QQ, SeriesError, TruncatedSeries
from .weierstrass import (
    A_INTEGRAL,
    CheckResult,
    CurvePoints,
    WeierstrassCurve,
    curve_invariants,
    krichever_curve_fgl,
    phi_curve,
)

COEFF_NAMES = tuple(s for s, _ in A_INTEGRAL)


@dataclass
class LSeriesCoefficients:
    """Coefficients of ``[l](x)`` through ``x^depth`` over GF(l)[a1, a2, a3, ab4]."""

    l: int
    coeffs: List[TruncatedSeries]

    def v(self, n: int) -> TruncatedSeries:
        return self.coeffs[self.l ** n]


@lru_cache(maxsize=None)
def symbolic_l_series(l: int, depth: Optional[int] = None) -> LSeriesCoefficients:
    """``[l](x)`` of the phi-curve law reduced mod ``l``, by chord arithmetic on the curve."""
    depth = l if depth is None else depth
    C = phi_curve(integral=True).reduce_mod(l)
    s = _multiply_to_depth(C, l, depth)
    coeffs = [coefficient_of(s, X, n) for n in range(depth + 1)]
    return LSeriesCoefficients(l, coeffs)


def _multiply_to_depth(C: WeierstrassCurve, n: int, depth: int) -> TruncatedSeries:
    """``[n](x)`` known through ``x^depth``; each chord addition costs one order."""
    extra = 0
    while True:
        s = CurvePoints(C, depth + extra).multiply(n)
        if s.order >= depth:
            return s.truncate(depth)
        extra += depth - s.order


def v1_mod(l: int) -> TruncatedSeries:
    return symbolic_l_series(l).v(1)


def _eval_poly(p: TruncatedSeries, point: Dict[str, object], field: GFq):
    ev = p.evaluate(point)
    return sum(ev.values(), field.coerce(0)) if ev else field.coerce(0)


def v0_check(primes: Sequence[int] = (2, 3, 5, 7), order: int = 8) -> CheckResult:
    """The linear coefficient of ``[l](x)`` over the integers is ``l``."""
    F = krichever_curve_fgl(order, integral=True, check_order=None)
    rows = []
    ok = True
    for l in primes:
        rep = l_series(F, l, 0)
        v0 = rep.v[0]
        good = v0 == TruncatedSeries.constant(v0.vars, l)
        ok &= good
        rows.append({"l": l, "v0": v0.to_str(), "ok": good})
    return CheckResult("landweber-v0", "pass" if ok else "fail", None if ok else rows, {"rows": rows})


@dataclass
class CurveLSeries:
    l: int
    mu: Tuple
    coeffs: List[object]

    def height(self) -> Optional[int]:
        """Smallest ``h`` with a nonzero coefficient at ``x^(l^h)``; lower ones vanish."""
        for n, c in enumerate(self.coeffs):
            if n and c:
                h = 0
                m = n
                while m % self.l == 0:
                    m //= self.l
                    h += 1
                return h if m == 1 else None
        return None


def point_l_series(C: WeierstrassCurve, l: int, depth: int) -> CurveLSeries:
    """``[l](x)`` of a curve with scalar coefficients over a finite field."""
    s = _multiply_to_depth(C, l, depth)
    coeffs = [s.coeff((n,)) for n in range(depth + 1)]
    return CurveLSeries(l, tuple(C.mu[m].constant_term() for m in C.mu), coeffs)


def _phi_point_curve(point: Dict[str, FqElem], field: GFq) -> WeierstrassCurve:
    C = phi_curve(integral=True).reduce_mod(field.p)
    return C.evaluate(point, field)


def supersingular_probe(l: int) -> CheckResult:
    """At ``l = 2``: ``v_1`` and the numerator of ``j`` vanish mod 2, and
    ``y^2 + y = x^3`` has height 2.  At odd ``l``: ``v_1`` is a nonzero
    polynomial, with a point of GF(l) where it does not vanish."""
    if l not in (2, 3, 5, 7):
        raise SeriesError("supersingular_probe supports l in {2, 3, 5, 7}")
    v1 = v1_mod(l)
    lower = symbolic_l_series(l).coeffs[2:l]
    lower_zero = all(c.is_zero() for c in lower)
    details: Dict[str, object] = {"l": l, "v1_terms": len(v1), "lower_coefficients_zero": lower_zero}
    if l == 2:
        inv = curve_invariants(phi_curve(integral=True).reduce_mod(2))
        j_num_zero = (inv.c4 ** 3).is_zero()
        delta_nonzero = not inv.delta.is_zero()
        field = GFq(2, 1)
        C = WeierstrassCurve.from_values([0, 0, 1, 0, 0], field)
        h = point_l_series(C, 2, 4).height()
        details.update({"v1_zero": v1.is_zero(), "j_numerator_zero": j_num_zero, "delta_nonzero": delta_nonzero,
                        "height_y2+y=x3": h})
        ok = v1.is_zero() and j_num_zero and delta_nonzero and h == 2
        return CheckResult(f"landweber-l{l}", "pass" if ok else "fail",
                           None if v1.is_zero() else v1.to_json(), details)
    field = GFq(l, 1)
    witness = None
    for vals in field.points(len(COEFF_NAMES)):
        pt = dict(zip(COEFF_NAMES, vals))
        if _eval_poly(v1, pt, field):
            witness = {s: v.to_json() for s, v in pt.items()}
            break
    generic = WeierstrassCurve.generic().reduce_mod(l)
    generic_v1 = coefficient_of(_multiply_to_depth(generic, l, l), X, l)
    details.update({"v1": v1.to_str(12), "v1_nonzero": not v1.is_zero(),
                    "generic_curve_v1": generic_v1.to_str(12),
                    "phi_b2": curve_invariants(phi_curve(integral=True)).b2.to_str()})
    ok = (not v1.is_zero()) and witness is not None and lower_zero
    if v1.is_zero():
        witness = {"v1_mod_l": "0", "phi_b2": details["phi_b2"], "generic_curve_v1": details["generic_curve_v1"]}
    return CheckResult(f"landweber-l{l}", "pass" if ok else "fail", witness, details)


@dataclass
class V2Report:
    l: int
    field: str
    scanned: int
    in_locus: int
    v2_nonzero: int
    failures: List[dict] = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.in_locus == 0:
            return "inconclusive"
        return "pass" if not self.failures else "fail"


def v2_unit_probe(l: int = 3, budget: Optional[int] = None, seed: int = 0, k: int = 2) -> CheckResult:
    """``v_2 != 0`` at the points of ``V(v_1) minus V(delta)`` over GF(l^k).

    With ``budget`` ``None`` the scan is exhaustive; otherwise ``budget``
    points are drawn with a seeded generator.
    """
    if l not in (3, 5, 7):
        raise SeriesError("v2_unit_probe supports l in {3, 5, 7}")
    field = GFq(l, k)
    v1 = v1_mod(l)
    delta = curve_invariants(phi_curve(integral=True).reduce_mod(l)).delta
    if budget is None:
        points = field.points(len(COEFF_NAMES))
    else:
        rng = random.Random(seed)
        points = (tuple(field.random(rng) for _ in COEFF_NAMES) for _ in range(budget))
    rep = V2Report(l, field.name, 0, 0, 0)
    cache: Dict[tuple, Optional[int]] = {}
    for vals in points:
        rep.scanned += 1
        pt = dict(zip(COEFF_NAMES, vals))
        if _eval_poly(v1, pt, field) or not _eval_poly(delta, pt, field):
            continue
        rep.in_locus += 1
        C = _phi_point_curve(pt, field)
        key = tuple((c.a, c.b) if isinstance(c, FqElem) else (c, 0) for c in (C.mu[m].constant_term() for m in C.mu))
        if key not in cache:
            s = point_l_series(C, l, l * l)
            low_zero = all(not c for c in s.coeffs[2:l * l])
            cache[key] = s.coeffs[l * l] if low_zero else None
        v2 = cache[key]
        if v2:
            rep.v2_nonzero += 1
        else:
            rep.failures.append({s: v.to_json() for s, v in pt.items()})
    details = {"field": rep.field, "scanned": rep.scanned, "in_locus": rep.in_locus, "v2_nonzero": rep.v2_nonzero,
               "distinct_curves": len(cache)}
    return CheckResult(f"landweber-v2-l{l}", rep.status, rep.failures[:5] or None, details)


def landweber_report(primes: Sequence[int] = (2, 3, 5, 7), v2_budget: Optional[int] = None, seed: int = 0) -> List[CheckResult]:
    out = [v0_check(primes)]
    for l in primes:
        out.append(supersingular_probe(l))
    if 3 in primes:
        out.append(v2_unit_probe(3, v2_budget, seed))
    return out
