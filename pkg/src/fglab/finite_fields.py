"""Small finite fields GF(p^k) for k in {1, 2}, used to sample curve parameters.

Elements of GF(p^2) are pairs ``a + b*theta`` with ``theta^2 = r`` for a fixed
non-residue ``r`` (odd ``p``) or ``theta^2 = theta + 1`` (``p = 2``).  The
element class supports mixing with Python ints, so exact series and
polynomials over GF(p) can be evaluated at such points directly.
"""

from __future__ import annotations

from itertools import product
from typing import Iterator, List


class FqElem:
    __slots__ = ("a", "b", "field")

    def __init__(self, a: int, b: int, field: "GFq"):
        p = field.p
        self.a = a % p
        self.b = b % p
        self.field = field

    def _coerce(self, o):
        if isinstance(o, FqElem):
            return o
        return self.field.coerce(o)

    def __add__(self, o):
        o = self._coerce(o)
        return FqElem(self.a + o.a, self.b + o.b, self.field)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._coerce(o)
        return FqElem(self.a - o.a, self.b - o.b, self.field)

    def __rsub__(self, o):
        return self._coerce(o) - self

    def __neg__(self):
        return FqElem(-self.a, -self.b, self.field)

    def __mul__(self, o):
        if isinstance(o, int):
            return FqElem(self.a * o, self.b * o, self.field)
        o = self._coerce(o)
        f = self.field
        a, b, c, d = self.a, self.b, o.a, o.b
        if f.k == 1:
            return FqElem(a * c, 0, f)
        bd = b * d
        if f.p == 2:
            # theta^2 = theta + 1
            return FqElem(a * c + bd, a * d + b * c + bd, f)
        return FqElem(a * c + f.r * bd, a * d + b * c, f)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        e = int(e)
        if e < 0:
            return self.inverse() ** (-e)
        out = FqElem(1, 0, self.field)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def inverse(self):
        if not self:
            raise ZeroDivisionError("inverse of zero in " + repr(self.field))
        return self ** (self.field.q - 2)

    def __truediv__(self, o):
        return self * self._coerce(o).inverse()

    def __rtruediv__(self, o):
        return self._coerce(o) * self.inverse()

    def __bool__(self):
        return bool(self.a or self.b)

    def __eq__(self, o):
        if isinstance(o, int):
            o = FqElem(o, 0, self.field)
        if not isinstance(o, FqElem):
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        if self.field.k == 1 or not self.b:
            return str(self.a)
        return f"{self.a}+{self.b}t"

    def to_json(self):
        return [self.a, self.b] if self.field.k == 2 else self.a


class GFq:
    """GF(p) or GF(p^2) as a coefficient ring for the series kernel."""

    is_field = True

    def __init__(self, p: int, k: int = 1):
        if k not in (1, 2):
            raise ValueError("only GF(p) and GF(p^2) are supported")
        self.p = p
        self.k = k
        self.q = p ** k
        self.characteristic = p
        self.name = f"GF({p}^{k})"
        self.r = None
        if k == 2 and p != 2:
            self.r = next(x for x in range(2, p) if pow(x, (p - 1) // 2, p) == p - 1) if p > 2 else None

    def coerce(self, x):
        if isinstance(x, FqElem):
            return x
        from fractions import Fraction

        if isinstance(x, int):
            return FqElem(x, 0, self)
        fr = Fraction(str(x)) if not isinstance(x, Fraction) else x
        if fr.denominator % self.p == 0:
            raise ZeroDivisionError("denominator divisible by the characteristic")
        return FqElem(fr.numerator * pow(fr.denominator, -1, self.p), 0, self)

    def div(self, a, b):
        return self.coerce(a) / self.coerce(b)

    def inverse(self, a):
        return self.coerce(a).inverse()

    def normalize(self, terms):
        return {k: c for k, c in terms.items() if c}

    def parts(self, c):
        raise TypeError("GF(p^2) coefficients have no rational form")

    def elements(self) -> List[FqElem]:
        p = self.p
        if self.k == 1:
            return [FqElem(a, 0, self) for a in range(p)]
        return [FqElem(a, b, self) for b in range(p) for a in range(p)]

    def points(self, dim: int) -> Iterator[tuple]:
        return product(self.elements(), repeat=dim)

    def random(self, rng) -> FqElem:
        return FqElem(rng.randrange(self.p), rng.randrange(self.p) if self.k == 2 else 0, self)

    def __eq__(self, o):
        return isinstance(o, GFq) and (o.p, o.k) == (self.p, self.k)

    def __hash__(self):
        return hash(("GFq", self.p, self.k))

    def __repr__(self):
        return self.name
