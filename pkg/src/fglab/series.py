"""Exact truncated multivariate power series.

A series lives over a :class:`VarTable` (ordered variable names with integer
weights) and a coefficient ring (:data:`QQ` or :class:`GF`).  Truncation only
bounds the total degree in the positive-weight variables; coefficient
variables of non-positive weight are carried symbolically.

Monomials are stored as packed integers: every exponent gets a 16-bit field
and an extra top field holds the positive-weight degree, so multiplying two
monomials is one integer addition and reading the truncation degree is one
shift.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import gmpy2
from gmpy2 import mpq

BITS = 16
MASK = (1 << BITS) - 1
MAX_EXP = MASK


class SeriesError(ValueError):
    """Generic misuse of the series kernel (mismatched tables, bad orders)."""


class NotDivisibleError(SeriesError):
    """Raised when an exact division leaves a nonzero remainder."""

    def __init__(self, message, monomial=None, degree=None):
        super().__init__(message)
        self.monomial = monomial
        self.degree = degree


# ---------------------------------------------------------------------------
# coefficient rings


class Rational:
    """Helpers for the rational coefficient type (gmpy2 ``mpq``).

    ``mpq`` is always in lowest terms with positive denominator, which is the
    canonical form we need; this class only gathers conversions.
    """

    @staticmethod
    def make(x) -> mpq:
        if isinstance(x, str):
            return mpq(x.strip())
        if isinstance(x, Fraction):
            return mpq(x.numerator, x.denominator)
        return mpq(x)

    @staticmethod
    def parts(x) -> Tuple[int, int]:
        x = mpq(x)
        return int(x.numerator), int(x.denominator)


class _QQ:
    """The rational numbers."""

    name = "QQ"
    characteristic = 0
    is_field = True

    def coerce(self, x):
        return Rational.make(x)

    def div(self, a, b):
        if not b:
            raise ZeroDivisionError("division by zero in QQ")
        return mpq(a) / b

    def inverse(self, a):
        return self.div(1, a)

    def normalize(self, terms):
        return {k: c for k, c in terms.items() if c}

    def parts(self, c):
        return Rational.parts(c)

    def __eq__(self, other):
        return isinstance(other, _QQ)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"


QQ = _QQ()


def _is_prime(n: int) -> bool:
    return n >= 2 and bool(gmpy2.is_prime(n))


class GF:
    """The prime field with ``p`` elements; elements are ints in ``[0, p)``."""

    is_field = True

    def __init__(self, p: int):
        p = int(p)
        if not _is_prime(p):
            raise SeriesError(f"GF modulus must be prime, got {p}")
        self.p = p
        self.characteristic = p
        self.name = f"GF({p})"

    def coerce(self, x):
        p = self.p
        if isinstance(x, PrimeFieldElem):
            if x.modulus != p:
                raise SeriesError("prime field mismatch")
            return x.value
        if isinstance(x, int) or type(x).__name__ == "mpz":
            return int(x) % p
        q = Rational.make(x)
        num, den = Rational.parts(q)
        if den % p == 0:
            raise ZeroDivisionError(f"denominator {den} not invertible mod {p}")
        return num * pow(den, -1, p) % p

    def div(self, a, b):
        b %= self.p
        if not b:
            raise ZeroDivisionError(f"division by zero in GF({self.p})")
        return a * pow(b, -1, self.p) % self.p

    def inverse(self, a):
        return self.div(1, a)

    def normalize(self, terms):
        p = self.p
        out = {}
        for k, c in terms.items():
            c %= p
            if c:
                out[k] = c
        return out

    def parts(self, c):
        return int(c), 1

    def __eq__(self, other):
        return isinstance(other, GF) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __repr__(self):
        return f"GF({self.p})"


class PrimeFieldElem:
    """A single element of GF(l), closed under field arithmetic."""

    __slots__ = ("value", "modulus")

    def __init__(self, value: int, modulus: int):
        self.modulus = int(modulus)
        self.value = int(value) % self.modulus

    def _other(self, o):
        if isinstance(o, PrimeFieldElem):
            if o.modulus != self.modulus:
                raise SeriesError("prime field mismatch")
            return o.value
        return GF(self.modulus).coerce(o)

    def __add__(self, o):
        return PrimeFieldElem(self.value + self._other(o), self.modulus)

    __radd__ = __add__

    def __sub__(self, o):
        return PrimeFieldElem(self.value - self._other(o), self.modulus)

    def __rsub__(self, o):
        return PrimeFieldElem(self._other(o) - self.value, self.modulus)

    def __mul__(self, o):
        return PrimeFieldElem(self.value * self._other(o), self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return PrimeFieldElem(-self.value, self.modulus)

    def __truediv__(self, o):
        return PrimeFieldElem(GF(self.modulus).div(self.value, self._other(o)), self.modulus)

    def __pow__(self, e):
        return PrimeFieldElem(pow(self.value, int(e), self.modulus), self.modulus)

    def __eq__(self, o):
        if isinstance(o, PrimeFieldElem):
            return o.modulus == self.modulus and o.value == self.value
        if isinstance(o, int):
            return (o - self.value) % self.modulus == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.modulus))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"{self.value} mod {self.modulus}"


Ring = Union[_QQ, GF]


# ---------------------------------------------------------------------------
# variable tables


class VarTable:
    """Ordered variable names with fixed integer weights."""

    __slots__ = ("names", "weights", "n", "index", "positive", "deg_shift", "_hash")

    def __init__(self, names: Sequence[str], weights: Sequence[int]):
        names = tuple(str(s) for s in names)
        weights = tuple(int(w) for w in weights)
        if len(names) != len(weights):
            raise SeriesError("names and weights differ in length")
        if len(set(names)) != len(names):
            raise SeriesError(f"duplicate variable names in {names}")
        self.names = names
        self.weights = weights
        self.n = len(names)
        self.index = {s: i for i, s in enumerate(names)}
        self.positive = tuple(i for i, w in enumerate(weights) if w > 0)
        self.deg_shift = BITS * self.n
        self._hash = hash((names, weights))

    @classmethod
    def of(cls, *pairs: Tuple[str, int]) -> "VarTable":
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    def pairs(self) -> List[Tuple[str, int]]:
        return list(zip(self.names, self.weights))

    def pack(self, exps: Sequence[int]) -> int:
        if len(exps) != self.n:
            raise SeriesError(f"exponent vector {tuple(exps)} has wrong length for {self.names}")
        key = 0
        deg = 0
        for i, e in enumerate(exps):
            e = int(e)
            if e < 0 or e > MAX_EXP:
                raise SeriesError(f"exponent {e} out of range")
            key |= e << (BITS * i)
            if self.weights[i] > 0:
                deg += e
        return key | (deg << self.deg_shift)

    def unpack(self, key: int) -> Tuple[int, ...]:
        return tuple((key >> (BITS * i)) & MASK for i in range(self.n))

    def degree(self, key: int) -> int:
        return key >> self.deg_shift

    def weight(self, key: int) -> int:
        w = 0
        for i, wt in enumerate(self.weights):
            if wt:
                w += wt * ((key >> (BITS * i)) & MASK)
        return w

    def var_key(self, name: str, power: int = 1) -> int:
        i = self.index[name]
        key = power << (BITS * i)
        if self.weights[i] > 0:
            key |= power << self.deg_shift
        return key

    def exponent(self, key: int, i: int) -> int:
        return (key >> (BITS * i)) & MASK

    def monomial_str(self, key: int) -> str:
        parts = []
        for name, e in zip(self.names, self.unpack(key)):
            if e == 1:
                parts.append(name)
            elif e:
                parts.append(f"{name}^{e}")
        return "*".join(parts) if parts else "1"

    def extend(self, pairs: Iterable[Tuple[str, int]]) -> "VarTable":
        """Append variables not already present (weights must agree)."""
        names = list(self.names)
        weights = list(self.weights)
        for name, w in pairs:
            if name in self.index:
                if self.weights[self.index[name]] != w:
                    raise SeriesError(f"weight clash for {name}")
                continue
            names.append(name)
            weights.append(w)
        return VarTable(names, weights)

    def drop(self, names: Iterable[str]) -> "VarTable":
        gone = set(names)
        kept = [(s, w) for s, w in self.pairs() if s not in gone]
        return VarTable([s for s, _ in kept], [w for _, w in kept])

    def __eq__(self, other):
        return isinstance(other, VarTable) and self.names == other.names and self.weights == other.weights

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "VarTable(" + ", ".join(f"{s}:{w}" for s, w in self.pairs()) + ")"


def _remap_fn(src: VarTable, dst: VarTable):
    """Return a function re-packing monomial keys of ``src`` into ``dst``."""
    if src == dst:
        return lambda k: k
    try:
        targets = [dst.index[s] for s in src.names]
    except KeyError as exc:
        raise SeriesError(f"variable {exc.args[0]} missing from target table {dst.names}") from None
    for i, j in enumerate(targets):
        if src.weights[i] != dst.weights[j]:
            raise SeriesError(f"weight clash for {src.names[i]}")
    shifts = [(BITS * i, BITS * j) for i, j in enumerate(targets)]
    dshift = dst.deg_shift
    sshift = src.deg_shift

    def remap(k):
        out = (k >> sshift) << dshift
        for si, dj in shifts:
            e = (k >> si) & MASK
            if e:
                out |= e << dj
        return out

    return remap


# ---------------------------------------------------------------------------
# the series type


def _min_order(*orders):
    known = [o for o in orders if o is not None]
    return min(known) if known else None


class TruncatedSeries:
    """A truncated power series with exact coefficients.

    ``order`` is the largest positive-weight degree that is known exactly;
    ``None`` marks an exact polynomial.  Values are immutable by convention:
    no method mutates ``terms`` after construction.
    """

    __slots__ = ("vars", "order", "ring", "terms")

    def __init__(self, vars: VarTable, terms: Mapping[int, object], order: Optional[int], ring: Ring = QQ, _trusted=False):
        self.vars = vars
        self.ring = ring
        if order is not None:
            order = int(order)
            if order < 0:
                raise SeriesError("order must be non-negative")
        self.order = order
        if _trusted:
            self.terms = terms
        else:
            shift = vars.deg_shift
            clean = {}
            for k, c in terms.items():
                if order is not None and (k >> shift) > order:
                    continue
                c = ring.coerce(c)
                if c:
                    clean[k] = c
            self.terms = clean

    # -- constructors -----------------------------------------------------------

    @classmethod
    def zero(cls, vars, order=None, ring=QQ):
        return cls(vars, {}, order, ring, _trusted=True)

    @classmethod
    def constant(cls, vars, c, order=None, ring=QQ):
        c = ring.coerce(c)
        return cls(vars, {0: c} if c else {}, order, ring, _trusted=True)

    @classmethod
    def variable(cls, vars, name, order=None, ring=QQ, power=1):
        return cls(vars, {vars.var_key(name, power): ring.coerce(1)}, order, ring, _trusted=True)

    @classmethod
    def from_dict(cls, vars, exps_to_coeff: Mapping, order=None, ring=QQ):
        terms = {}
        for exps, c in exps_to_coeff.items():
            k = vars.pack(exps)
            terms[k] = terms.get(k, 0) + ring.coerce(c)
        return cls(vars, terms, order, ring)

    @classmethod
    def from_univariate(cls, vars, name, coeffs: Sequence, order=None, ring=QQ):
        """Series ``sum coeffs[n] * name^n`` with scalar coefficients."""
        terms = {}
        for n, c in enumerate(coeffs):
            c = ring.coerce(c)
            if c:
                terms[vars.var_key(name, n)] = c
        return cls(vars, terms, order, ring)

    def _new(self, terms, order):
        return TruncatedSeries(self.vars, terms, order, self.ring, _trusted=True)

    # -- inspection -------------------------------------------------------------

    def items(self):
        """Yield ``(exponent tuple, coefficient)`` pairs in sorted order."""
        unpack = self.vars.unpack
        for exps, c in sorted((unpack(k), c) for k, c in self.terms.items()):
            yield exps, c

    def coeff(self, exps) -> object:
        if isinstance(exps, Mapping):
            e = [0] * self.vars.n
            for name, p in exps.items():
                e[self.vars.index[name]] = p
            exps = e
        return self.terms.get(self.vars.pack(exps), self.ring.coerce(0))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def constant_term(self):
        return self.terms.get(0, self.ring.coerce(0))

    def degree_zero_part(self) -> "TruncatedSeries":
        shift = self.vars.deg_shift
        return self._new({k: c for k, c in self.terms.items() if not (k >> shift)}, self.order)

    def valuation(self) -> Optional[int]:
        """Lowest positive-weight degree present (``None`` for the zero series)."""
        if not self.terms:
            return None
        shift = self.vars.deg_shift
        return min(k >> shift for k in self.terms)

    def max_degree(self) -> int:
        shift = self.vars.deg_shift
        return max((k >> shift for k in self.terms), default=0)

    def graded(self) -> Dict[int, Dict[int, object]]:
        shift = self.vars.deg_shift
        out: Dict[int, Dict[int, object]] = defaultdict(dict)
        for k, c in self.terms.items():
            out[k >> shift][k] = c
        return dict(out)

    def graded_piece(self, d: int) -> "TruncatedSeries":
        shift = self.vars.deg_shift
        return self._new({k: c for k, c in self.terms.items() if (k >> shift) == d}, None)

    def is_homogeneous(self, weight: int = 0) -> bool:
        w = self.vars.weight
        return all(w(k) == weight for k in self.terms)

    def inhomogeneous_witness(self, weight: int = 0):
        w = self.vars.weight
        for exps, c in self.items():
            if w(self.vars.pack(exps)) != weight:
                return exps, c
        return None

    def free_vars(self) -> List[str]:
        used = 0
        for k in self.terms:
            used |= k
        return [s for i, s in enumerate(self.vars.names) if (used >> (BITS * i)) & MASK]

    def positive_vars(self) -> List[str]:
        return [self.vars.names[i] for i in self.vars.positive]

    # -- arithmetic -------------------------------------------------------------

    def _check(self, other: "TruncatedSeries"):
        if not isinstance(other, TruncatedSeries):
            raise SeriesError(f"expected a TruncatedSeries, got {type(other).__name__}")
        if self.vars != other.vars:
            raise SeriesError(f"variable-table mismatch: {self.vars} vs {other.vars}")
        if self.ring != other.ring:
            raise SeriesError(f"coefficient-ring mismatch: {self.ring} vs {other.ring}")

    def _lift(self, other):
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        return TruncatedSeries.constant(self.vars, other, None, self.ring)

    def truncate(self, order: Optional[int]) -> "TruncatedSeries":
        order = _min_order(order, self.order)
        if order == self.order:
            return self
        shift = self.vars.deg_shift
        return self._new({k: c for k, c in self.terms.items() if (k >> shift) <= order}, order)

    def with_order(self, order: Optional[int]) -> "TruncatedSeries":
        """Relabel as known through ``order`` (only sound for exact data)."""
        if order is None:
            return self._new(dict(self.terms), None)
        shift = self.vars.deg_shift
        return self._new({k: c for k, c in self.terms.items() if (k >> shift) <= order}, order)

    def __add__(self, other):
        other = self._lift(other)
        order = _min_order(self.order, other.order)
        out = dict(self.terms)
        get = out.get
        for k, c in other.terms.items():
            out[k] = get(k, 0) + c
        out = self.ring.normalize(out)
        res = self._new(out, None)
        return res.truncate(order) if order is not None else res

    __radd__ = __add__

    def __neg__(self):
        if type(self.ring) is GF:
            p = self.ring.p
            return self._new({k: (-c) % p for k, c in self.terms.items()}, self.order)
        return self._new({k: -c for k, c in self.terms.items()}, self.order)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "TruncatedSeries":
        c = self.ring.coerce(c)
        if not c:
            return self._new({}, self.order)
        return self._new(self.ring.normalize({k: v * c for k, v in self.terms.items()}), self.order)

    def shift_monomial(self, key: int, coeff=1) -> "TruncatedSeries":
        """Multiply by ``coeff`` times the monomial with packed key ``key``."""
        coeff = self.ring.coerce(coeff)
        out = {k + key: c * coeff for k, c in self.terms.items()}
        res = self._new(self.ring.normalize(out), self.order)
        return res.truncate(self.order)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._check(other)
        order = _min_order(self.order, other.order)
        out = _mul_terms(self.terms, other.terms, self.vars.deg_shift, order)
        return self._new(self.ring.normalize(out), order)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        e = int(e)
        if e < 0:
            raise SeriesError("negative powers need divide_unit")
        result = TruncatedSeries.constant(self.vars, 1, self.order, self.ring)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def powers(self, n: int, order: Optional[int] = None) -> List["TruncatedSeries"]:
        """``[self^0, ..., self^n]`` truncated to ``order``."""
        base = self.truncate(order) if order is not None else self
        out = [TruncatedSeries.constant(self.vars, 1, base.order, self.ring)]
        for _ in range(n):
            out.append(out[-1] * base)
        return out

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            if isinstance(other, (int, Fraction)) or type(other).__name__ in ("mpq", "mpz"):
                return self == TruncatedSeries.constant(self.vars, other, self.order, self.ring)
            return NotImplemented
        if self.vars != other.vars or self.ring != other.ring:
            return False
        order = _min_order(self.order, other.order)
        a = self.truncate(order).terms
        b = other.truncate(order).terms
        return a == b

    __hash__ = None

    def __repr__(self):
        return f"TruncatedSeries({self.to_str(12)}, order={self.order}, ring={self.ring})"

    def to_str(self, max_terms: Optional[int] = None) -> str:
        parts = []
        for n, (exps, c) in enumerate(self.items()):
            if max_terms is not None and n >= max_terms:
                parts.append("...")
                break
            mono = self.vars.monomial_str(self.vars.pack(exps))
            parts.append(f"({c})*{mono}" if mono != "1" else f"({c})")
        return " + ".join(parts) if parts else "0"

    # -- calculus ---------------------------------------------------------------

    def derivative(self, var: str) -> "TruncatedSeries":
        i = self.vars.index[var]
        one = self.vars.var_key(var)
        sh = BITS * i
        out = {}
        for k, c in self.terms.items():
            e = (k >> sh) & MASK
            if e:
                out[k - one] = c * e
        order = self.order
        if order is not None and self.vars.weights[i] > 0:
            order = max(order - 1, 0)
        return self._new(self.ring.normalize(out), order)

    def integrate(self, var: str) -> "TruncatedSeries":
        if self.ring.characteristic:
            raise SeriesError("integration requires rational coefficients")
        i = self.vars.index[var]
        one = self.vars.var_key(var)
        sh = BITS * i
        out = {}
        for k, c in self.terms.items():
            e = (k >> sh) & MASK
            out[k + one] = c / (e + 1)
        order = self.order
        if order is not None and self.vars.weights[i] > 0:
            order += 1
        return self._new(out, order)

    # -- ring changes -----------------------------------------------------------

    def embed(self, target: VarTable) -> "TruncatedSeries":
        """Re-express over a table containing all of this table's variables."""
        remap = _remap_fn(self.vars, target)
        return TruncatedSeries(target, {remap(k): c for k, c in self.terms.items()}, self.order, self.ring, _trusted=True)

    def restrict(self, target: VarTable) -> "TruncatedSeries":
        """Re-express over a smaller table; fails if a dropped variable occurs."""
        used = set(self.free_vars())
        missing = used - set(target.names)
        if missing:
            raise SeriesError(f"cannot restrict: variables {sorted(missing)} occur")
        keep = VarTable([s for s in self.vars.names if s in target.index],
                        [w for s, w in self.vars.pairs() if s in target.index])
        back = _remap_fn(keep, target)
        fwd = {}
        for k, c in self.terms.items():
            exps = self.vars.unpack(k)
            sub = [e for s, e in zip(self.vars.names, exps) if s in target.index]
            fwd[back(keep.pack(sub))] = c
        return TruncatedSeries(target, fwd, self.order, self.ring, _trusted=True)

    def reduce_mod(self, p: int) -> "TruncatedSeries":
        """Coefficientwise reduction of a rational series into GF(p)."""
        if self.ring != QQ:
            raise SeriesError("reduce_mod expects rational coefficients")
        F = GF(p)
        out = {}
        for k, c in self.terms.items():
            num, den = Rational.parts(c)
            if den % p == 0:
                raise NotDivisibleError(
                    f"coefficient {c} of {self.vars.monomial_str(k)} has denominator divisible by {p}",
                    monomial=self.vars.unpack(k))
            v = num * pow(den, -1, p) % p
            if v:
                out[k] = v
        return TruncatedSeries(self.vars, out, self.order, F, _trusted=True)

    def is_integral(self) -> bool:
        if self.ring != QQ:
            return True
        return all(mpq(c).denominator == 1 for c in self.terms.values())

    def non_integral_witness(self):
        for exps, c in self.items():
            if self.ring == QQ and mpq(c).denominator != 1:
                return exps, c
        return None

    def map_coefficients(self, fn) -> "TruncatedSeries":
        return TruncatedSeries(self.vars, {k: fn(c) for k, c in self.terms.items()}, self.order, self.ring)

    def evaluate(self, values: Mapping[str, object], target: Optional[VarTable] = None):
        """Substitute numbers (any type supporting + and *) for some variables.

        Returns a plain dict ``{exponent tuple over target: value}``, where
        ``target`` defaults to the remaining variables.  Intended for numeric
        specialisation; exact series substitution is :func:`substitute`.
        """
        idx = {self.vars.index[s]: v for s, v in values.items()}
        rest = [i for i in range(self.vars.n) if i not in idx]
        out: Dict[Tuple[int, ...], object] = {}
        for k, c in self.terms.items():
            exps = self.vars.unpack(k)
            val = c
            for i, v in idx.items():
                if exps[i]:
                    val = val * v ** exps[i]
            key = tuple(exps[i] for i in rest)
            out[key] = out.get(key, 0) + val
        return out

    # -- serialisation ----------------------------------------------------------

    def to_json(self) -> dict:
        terms = []
        for exps, c in self.items():
            num, den = self.ring.parts(c)
            terms.append({"exps": list(exps), "num": str(num), "den": str(den)})
        out = {
            "vars": [{"name": s, "weight": w} for s, w in self.vars.pairs()],
            "order": self.order,
            "terms": terms,
        }
        if self.ring != QQ:
            out["modulus"] = self.ring.p
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "TruncatedSeries":
        vars = VarTable([v["name"] for v in data["vars"]], [v["weight"] for v in data["vars"]])
        ring = GF(data["modulus"]) if data.get("modulus") else QQ
        terms = {}
        for t in data["terms"]:
            c = ring.coerce(mpq(int(t["num"]), int(t["den"])))
            terms[vars.pack(t["exps"])] = c
        return cls(vars, terms, data["order"], ring)


def _mul_terms(ta: Mapping[int, object], tb: Mapping[int, object], shift: int, order: Optional[int]):
    """Sparse product of packed-term dicts truncated at ``order``."""
    if len(ta) > len(tb):
        ta, tb = tb, ta
    out: Dict[int, object] = {}
    get = out.get
    if not ta or not tb:
        return out
    if order is None:
        items_b = list(tb.items())
        for ka, ca in ta.items():
            for kb, cb in items_b:
                k = ka + kb
                out[k] = get(k, 0) + ca * cb
        return out
    buckets: Dict[int, List[Tuple[int, object]]] = defaultdict(list)
    for kb, cb in tb.items():
        d = kb >> shift
        if d <= order:
            buckets[d].append((kb, cb))
    if not buckets:
        return out
    top = max(buckets)
    cum: List[List[Tuple[int, object]]] = []
    acc: List[Tuple[int, object]] = []
    for d in range(top + 1):
        acc = acc + buckets.get(d, [])
        cum.append(acc)
    for ka, ca in ta.items():
        lim = order - (ka >> shift)
        if lim < 0:
            continue
        for kb, cb in cum[lim if lim < top else top]:
            k = ka + kb
            out[k] = get(k, 0) + ca * cb
    return out


# ---------------------------------------------------------------------------
# module-level operations (the public kernel API)


def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    a._check(b)
    return a + b


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    a._check(b)
    return a * b


def univariate_var(f: TruncatedSeries) -> str:
    """Name of the single positive-weight variable of a univariate series."""
    pos = [f.vars.names[i] for i in f.vars.positive]
    if len(pos) != 1:
        raise SeriesError(f"expected exactly one positive-weight variable, found {pos}")
    return pos[0]


def substitute(f: TruncatedSeries, mapping: Mapping[str, TruncatedSeries], target: Optional[VarTable] = None,
               order: Optional[int] = None) -> TruncatedSeries:
    """Substitute series for variables of ``f``.

    Variables of ``f`` not in ``mapping`` are carried over by name into
    ``target`` (which defaults to the table of the mapped series).  Positive
    variables can only be replaced by series without constant term, which
    makes the truncation bookkeeping sound: the result is known through
    ``min(order(f), orders of the arguments)``.
    """
    if not mapping:
        if target is None:
            return f
        return f.embed(target).truncate(order)
    vals = list(mapping.values())
    if target is None:
        target = vals[0].vars
    ring = f.ring
    for s in vals:
        if s.vars != target:
            raise SeriesError("all substituted series must share the target table")
        if s.ring != ring:
            raise SeriesError("coefficient-ring mismatch in substitution")
    src = f.vars
    mapped_idx = []
    for name, s in mapping.items():
        if name not in src.index:
            raise SeriesError(f"{name} is not a variable of the series")
        i = src.index[name]
        if src.weights[i] > 0 and f.order is not None and s.terms:
            v = s.valuation()
            if v is None or v < 1:
                raise SeriesError(f"argument for {name} has a nonzero constant term")
        if src.weights[i] > 0 and s.constant_term():
            raise SeriesError(f"argument for {name} has a nonzero constant term")
        mapped_idx.append((i, s))
    res_order = _min_order(f.order, order, *[s.order for _, s in mapped_idx])
    if res_order is None:
        # exact substitution of polynomials; mapped coefficient variables may
        # still carry positive degree so no truncation is possible
        pass
    rest_vars = src.drop(mapping.keys())
    remap = _remap_fn(rest_vars, target)
    keep_pos = [(i, BITS * i) for i in range(src.n) if src.names[i] not in mapping]
    rest_shifts = [(BITS * i, BITS * rest_vars.index[src.names[i]]) for i, _ in keep_pos]
    rshift = rest_vars.deg_shift

    # fast path: mapping a variable to c * monomial becomes a key shift
    mono_maps = {}
    general = []
    for i, s in mapped_idx:
        if len(s.terms) == 1:
            (k, c), = s.terms.items()
            mono_maps[i] = (k, c)
        else:
            general.append((i, s))

    groups: Dict[Tuple[int, ...], Dict[int, object]] = defaultdict(dict)
    ring_norm = ring.normalize
    for k, c in f.terms.items():
        exps = src.unpack(k)
        rk = 0
        deg = 0
        for si, di in rest_shifts:
            e = (k >> si) & MASK
            if e:
                rk |= e << di
        for i, _ in keep_pos:
            if src.weights[i] > 0:
                deg += exps[i]
        tk = remap(rk | (deg << rshift))
        coef = c
        for i, (mk, mc) in mono_maps.items():
            e = exps[i]
            if e:
                tk += mk * e
                if mc != 1:
                    coef = coef * mc ** e
        if res_order is not None and (tk >> target.deg_shift) > res_order:
            continue
        pat = tuple(exps[i] for i, _ in general)
        g = groups[pat]
        g[tk] = g.get(tk, 0) + coef

    power_cache: Dict[int, List[TruncatedSeries]] = {}

    def power(j: int, e: int) -> TruncatedSeries:
        lst = power_cache.setdefault(j, [TruncatedSeries.constant(target, 1, res_order, ring)])
        base = general[j][1].truncate(res_order)
        while len(lst) <= e:
            lst.append(lst[-1] * base)
        return lst[e]

    prod_cache: Dict[Tuple[int, ...], TruncatedSeries] = {}

    def product(pat: Tuple[int, ...]) -> TruncatedSeries:
        if pat in prod_cache:
            return prod_cache[pat]
        if not pat:
            val = TruncatedSeries.constant(target, 1, res_order, ring)
        else:
            head = product(pat[:-1])
            e = pat[-1]
            val = head if e == 0 else head * power(len(pat) - 1, e)
        prod_cache[pat] = val
        return val

    acc: Dict[int, object] = {}
    shift = target.deg_shift
    for pat, rest in groups.items():
        rest = ring_norm(rest)
        if not rest:
            continue
        if not any(pat):
            prod_terms = {0: ring.coerce(1)}
        else:
            prod_terms = product(pat).terms
        part = _mul_terms(rest, prod_terms, shift, res_order)
        get = acc.get
        for kk, cc in part.items():
            acc[kk] = get(kk, 0) + cc
    return TruncatedSeries(target, ring_norm(acc), res_order, ring, _trusted=True)


def series_compose(f: TruncatedSeries, args: Sequence[TruncatedSeries]) -> TruncatedSeries:
    """Substitute ``args`` for the positive-weight variables of ``f`` in order.

    Coefficient variables of ``f`` are carried over by name.
    """
    pos = [f.vars.names[i] for i in f.vars.positive]
    if len(args) != len(pos):
        raise SeriesError(f"expected {len(pos)} arguments, got {len(args)}")
    for a in args:
        if a.constant_term():
            raise SeriesError("composition argument has a nonzero constant term")
    return substitute(f, dict(zip(pos, args)))


def divide_unit(a: TruncatedSeries, u: TruncatedSeries) -> TruncatedSeries:
    """Return ``q`` with ``q * u == a`` up to order; ``u`` needs a scalar unit constant term."""
    a._check(u)
    ring = a.ring
    shift = a.vars.deg_shift
    gu = u.graded()
    u0 = gu.get(0, {})
    if set(u0) != {0}:
        raise SeriesError("divisor must have an invertible scalar constant term")
    inv0 = ring.inverse(u0[0])
    order = _min_order(a.order, u.order)
    if order is None:
        raise SeriesError("divide_unit needs a finite truncation order")
    ga = a.graded()
    qpieces: Dict[int, Dict[int, object]] = {}
    hi_u = [d for d in sorted(gu) if d > 0]
    for d in range(order + 1):
        acc = dict(ga.get(d, {}))
        get = acc.get
        for j in hi_u:
            if j > d:
                break
            qp = qpieces.get(d - j)
            if not qp:
                continue
            for kq, cq in qp.items():
                for ku, cu in gu[j].items():
                    k = kq + ku
                    acc[k] = get(k, 0) - cq * cu
        piece = ring.normalize({k: c * inv0 for k, c in acc.items()})
        if piece:
            qpieces[d] = piece
    terms = {}
    for p in qpieces.values():
        terms.update(p)
    return TruncatedSeries(a.vars, terms, order, ring, _trusted=True)


def series_divide_unit(a: TruncatedSeries, u: TruncatedSeries) -> TruncatedSeries:
    return divide_unit(a, u)


def inverse_unit(u: TruncatedSeries) -> TruncatedSeries:
    return divide_unit(TruncatedSeries.constant(u.vars, 1, u.order, u.ring), u)


def _divide_piece_by_linear(piece: Dict[int, object], lin: List[Tuple[int, object]], pivot: int, vars: VarTable, ring,
                            degree: int):
    """Exactly divide a homogeneous piece by a linear form.

    ``lin`` lists ``(key, coeff)`` pairs of the form; ``pivot`` is the index of
    the variable used for long division.  Returns the quotient terms or raises
    :class:`NotDivisibleError` naming a monomial of the remainder.
    """
    sh = BITS * pivot
    pkey = vars.var_key(vars.names[pivot])
    cpiv = None
    others = []
    for k, c in lin:
        if k == pkey:
            cpiv = c
        else:
            others.append((k, c))
    inv = ring.inverse(cpiv)
    by_e: Dict[int, Dict[int, object]] = defaultdict(dict)
    for k, c in piece.items():
        by_e[(k >> sh) & MASK][k] = c
    quotient: Dict[int, object] = {}
    top = max(by_e) if by_e else 0
    p = ring.p if type(ring) is GF else None
    for e in range(top, 0, -1):
        layer = by_e.get(e)
        if not layer:
            continue
        below = by_e[e - 1]
        bget = below.get
        for k, c in layer.items():
            if p:
                c %= p
            if not c:
                continue
            t = c * inv
            qk = k - pkey
            quotient[qk] = t
            for ok, oc in others:
                kk = qk + ok
                below[kk] = bget(kk, 0) - t * oc
    rem = ring.normalize(by_e.get(0, {}))
    if rem:
        k = min(rem, key=vars.unpack)
        raise NotDivisibleError(
            f"nonzero remainder at degree {degree}: monomial {vars.monomial_str(k)} with coefficient {rem[k]}",
            monomial=vars.unpack(k), degree=degree)
    return ring.normalize(quotient)


def exact_divide(a: TruncatedSeries, s: TruncatedSeries) -> TruncatedSeries:
    """Exact quotient ``a / s`` where ``s`` starts with a scalar linear form.

    The quotient is determined degree by degree and carries order
    ``min(order) - 1``.  Any nonzero remainder raises
    :class:`NotDivisibleError` with the offending monomial.
    """
    a._check(s)
    ring = a.ring
    vars = a.vars
    gs = s.graded()
    if 0 in gs:
        raise SeriesError("divisor must have no constant term")
    lin_piece = gs.get(1)
    if not lin_piece:
        raise SeriesError("divisor has no linear part")
    pos = set(vars.positive)
    lin = []
    pivot = None
    for k, c in lin_piece.items():
        exps = vars.unpack(k)
        nz = [i for i, e in enumerate(exps) if e]
        if len(nz) != 1 or nz[0] not in pos:
            raise SeriesError("linear part must have scalar coefficients on positive variables")
        lin.append((k, c))
        if pivot is None or nz[0] < pivot:
            pivot = nz[0]
    order = _min_order(a.order, s.order)
    ga = a.graded()
    if ga.get(0):
        k = next(iter(ga[0]))
        raise NotDivisibleError(f"nonzero degree-0 part {vars.monomial_str(k)}", monomial=vars.unpack(k), degree=0)
    if order is None:
        top = max(ga) if ga else 0
        if len(gs) > 1:
            raise SeriesError("exact division of polynomials requires a purely linear divisor")
    else:
        top = order
    higher = [(j, gs[j]) for j in sorted(gs) if j >= 2]
    qpieces: Dict[int, Dict[int, object]] = {}
    for d in range(1, top + 1):
        acc = dict(ga.get(d, {}))
        get = acc.get
        for j, sp in higher:
            qd = d - j
            if qd < 0:
                break
            qp = qpieces.get(qd)
            if not qp:
                continue
            for kq, cq in qp.items():
                for ks, cs in sp.items():
                    k = kq + ks
                    acc[k] = get(k, 0) - cq * cs
        acc = ring.normalize(acc)
        if not acc:
            continue
        qpieces[d - 1] = _divide_piece_by_linear(acc, lin, pivot, vars, ring, d)
    terms = {}
    for p in qpieces.values():
        terms.update(p)
    new_order = None if order is None else max(order - 1, 0)
    return TruncatedSeries(vars, terms, new_order, ring, _trusted=True)


def exact_divide_linear(a: TruncatedSeries, L: TruncatedSeries) -> TruncatedSeries:
    """Exact quotient by a linear form with scalar coefficients."""
    gl = L.graded()
    if set(gl) != {1}:
        raise SeriesError("exact_divide_linear expects a homogeneous linear form")
    return exact_divide(a, L.with_order(None) if L.order is not None else L)


def series_derivative(a: TruncatedSeries, var: str) -> TruncatedSeries:
    return a.derivative(var)


def series_integrate(a: TruncatedSeries, var: Optional[str] = None) -> TruncatedSeries:
    return a.integrate(var or univariate_var(a))


def _compose_univariate(f: TruncatedSeries, g: TruncatedSeries, order: Optional[int] = None) -> TruncatedSeries:
    x = univariate_var(f)
    return substitute(f, {x: g}, g.vars, order)


def series_reversion(f: TruncatedSeries) -> TruncatedSeries:
    """Compositional inverse of a univariate series ``c*x + ...`` with ``c`` a unit.

    Newton iteration over the rationals; a triangular term-by-term solve over
    prime fields.  Coefficient variables may occur in higher coefficients.
    """
    x = univariate_var(f)
    if f.order is None:
        raise SeriesError("reversion needs a finite truncation order")
    ring = f.ring
    vars = f.vars
    N = f.order
    g1 = f.graded()
    if g1.get(0):
        raise SeriesError("series to invert has a nonzero constant term")
    xk = vars.var_key(x)
    lin = g1.get(1, {})
    if set(lin) != {xk}:
        raise SeriesError("linear coefficient must be a nonzero scalar")
    c = lin[xk]
    if c != 1:
        # f = c * f1 with f1 = x + ...; f^{-1}(y) = f1^{-1}(y / c)
        inv_c = ring.inverse(c)
        f1 = f.scale(inv_c)
        r = series_reversion(f1)
        return substitute(r, {x: TruncatedSeries.variable(vars, x, N, ring).scale(inv_c)}, vars)
    X = TruncatedSeries.variable(vars, x, N, ring)
    if ring.characteristic:
        g = X
        for n in range(2, N + 1):
            err = _compose_univariate(f, g.truncate(n), n) - X.truncate(n)
            piece = err.graded().get(n, {})
            if piece:
                g = g - TruncatedSeries(vars, piece, N, ring, _trusted=True)
        return g.truncate(N)
    fp = f.derivative(x)
    g = X.truncate(1)
    prec = 1
    while prec < N:
        prec = min(2 * prec, N)
        gp = g.with_order(prec)
        err = _compose_univariate(f, gp, prec) - X.truncate(prec)
        # err has valuation >= 2, so the quotient only needs f' through
        # degree prec - 2; relabelling its order is therefore exact here
        d = _compose_univariate(fp.with_order(prec), gp, prec)
        g = gp - divide_unit(err, d)
    return g.truncate(N)
