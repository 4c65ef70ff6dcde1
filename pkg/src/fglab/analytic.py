"""Weierstrass sigma and zeta by lattice products, the sigma-function identity,
q-expansions of the elliptic coefficients, and a numeric bridge to the exact
elliptic characteristic series.

The lattice is ``Z + Z tau``.  ``sigma_eval`` multiplies the factors of the
box ``|m|, |n| <= M`` and then applies a tail correction
``exp(-sum_k T_2k z^2k / 2k)`` where ``T_2k`` is the difference between the
Eisenstein series ``G_2k`` (from its q-expansion) and its box sum.  The
uncorrected box product is available with ``corrected=False``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import bernoulli, zeta as riemann_zeta

TWO_PI_I = 2j * math.pi
TAIL_TERMS = 8


class AnalyticError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeParams:
    tau: complex = 1j
    M: int = 40

    def __post_init__(self):
        if complex(self.tau).imag <= 0:
            raise AnalyticError("tau must lie in the upper half plane")
        if self.M < 1:
            raise AnalyticError("lattice radius M must be >= 1")

    @property
    def q(self) -> complex:
        return cmath.exp(TWO_PI_I * self.tau)


@lru_cache(maxsize=32)
def _lattice(tau: complex, M: int) -> np.ndarray:
    m, n = np.meshgrid(np.arange(-M, M + 1), np.arange(-M, M + 1))
    w = (m + n * tau).ravel()
    return w[w != 0]


def eisenstein_g(k2: int, tau: complex, terms: int = 60) -> complex:
    """``G_2k(tau) = sum' w^(-2k)`` for ``2k >= 4`` from its q-expansion."""
    if k2 < 4 or k2 % 2:
        raise AnalyticError("G_2k needs an even weight >= 4")
    q = cmath.exp(TWO_PI_I * tau)
    B = bernoulli(k2)[k2]
    s = 0j
    qn = 1
    for n in range(1, terms + 1):
        qn *= q
        if abs(qn) < 1e-300:
            break
        s += sum(d ** (k2 - 1) for d in range(1, n + 1) if n % d == 0) * qn
    return 2 * riemann_zeta(k2) * (1 - 2 * k2 / B * s)


@lru_cache(maxsize=32)
def _tail(tau: complex, M: int) -> Tuple[complex, ...]:
    """``T_2k = G_2k - box sum`` for ``2k = 4, 6, ...``."""
    w = _lattice(tau, M)
    out = []
    for j in range(TAIL_TERMS):
        k2 = 4 + 2 * j
        out.append(eisenstein_g(k2, tau) - complex(np.sum(w ** (-k2))))
    return tuple(out)


def _tail_log(z: complex, L: LatticeParams) -> complex:
    T = _tail(complex(L.tau), L.M)
    return -sum(t * z ** (4 + 2 * j) / (4 + 2 * j) for j, t in enumerate(T))


def _tail_log_derivative(z: complex, L: LatticeParams) -> complex:
    T = _tail(complex(L.tau), L.M)
    return -sum(t * z ** (3 + 2 * j) for j, t in enumerate(T))


def sigma_eval(z: complex, L: LatticeParams = LatticeParams(), corrected: bool = True) -> complex:
    z = complex(z)
    if z == 0:
        return 0j
    if abs(z) > 0.5 * L.M:
        raise AnalyticError(f"|z| = {abs(z):.3g} is too large for lattice radius {L.M}")
    w = _lattice(complex(L.tau), L.M)
    r = z / w
    fac = (1 - r) * np.exp(r + r * r / 2)
    if np.any(fac == 0):
        return 0j
    logsum = complex(np.sum(np.log(fac)))
    if corrected:
        logsum += _tail_log(z, L)
    return z * cmath.exp(logsum)


def zeta_eval(z: complex, L: LatticeParams = LatticeParams(), corrected: bool = True) -> complex:
    z = complex(z)
    if z == 0:
        raise AnalyticError("zeta has a pole at 0")
    w = _lattice(complex(L.tau), L.M)
    val = 1 / z + complex(np.sum(1 / (z - w) + 1 / w + z / w ** 2))
    if corrected:
        val += _tail_log_derivative(z, L)
    return val


@dataclass
class EtaPair:
    eta1: complex
    eta2: complex
    eta1_zeta: complex
    eta2_zeta: complex

    @property
    def consistency(self) -> float:
        return max(abs(self.eta1 - self.eta1_zeta), abs(self.eta2 - self.eta2_zeta))

    def legendre_residual(self, tau: complex) -> float:
        return abs(self.eta1 * tau - self.eta2 - TWO_PI_I)


def _eta_from_sigma(period: complex, L: LatticeParams, deltas=(0.01, 0.02)) -> complex:
    """Solve ``sigma(z + p) = -exp(eta (z + p/2)) sigma(z)`` near ``z = -p/2``."""
    vals = []
    for d in deltas:
        z = -period / 2 + d * period
        ratio = -sigma_eval(z + period, L) / sigma_eval(z, L)
        vals.append(cmath.log(ratio) / (z + period / 2))
    return sum(vals) / len(vals)


def eta_constants(L: LatticeParams = LatticeParams(), tol: float = 1e-8) -> EtaPair:
    tau = complex(L.tau)
    e1 = _eta_from_sigma(1, L)
    e2 = _eta_from_sigma(tau, L)
    z = 0.123 + 0.071j
    e1z = zeta_eval(z + 1, L) - zeta_eval(z, L)
    e2z = zeta_eval(z + tau, L) - zeta_eval(z, L)
    pair = EtaPair(e1, e2, e1z, e2z)
    if pair.consistency > tol:
        raise AnalyticError(f"eta extraction methods disagree by {pair.consistency:.3g}")
    return pair


# ---------------------------------------------------------------------------
# the sigma-function identity


def ww_terms(x: Sequence[complex], y: Sequence[complex], L: LatticeParams = LatticeParams()) -> List[complex]:
    n = len(x)
    out = []
    for r in range(n):
        num = 1 + 0j
        for j in range(n):
            num *= sigma_eval(x[r] - y[j], L)
        den = 1 + 0j
        for j in range(n):
            if j != r:
                den *= sigma_eval(x[r] - x[j], L)
        out.append(num / den)
    return out


def ww_identity_check(n: int, x: Sequence[complex], y: Sequence[complex], L: LatticeParams = LatticeParams(),
                      tol: float = 1e-8) -> float:
    """``|sum_r prod_j sigma(x_r - y_j) / prod_(j != r) sigma(x_r - x_j)|``."""
    if len(x) != n or len(y) != n:
        raise AnalyticError("x and y must both have n entries")
    if abs(sum(x) - sum(y)) > tol:
        raise AnalyticError("the identity needs sum(x) = sum(y)")
    for i in range(n):
        for j in range(i):
            if abs(sigma_eval(x[i] - x[j], L)) < 1e-12:
                raise AnalyticError("x entries must be distinct modulo the lattice")
    return abs(sum(ww_terms(x, y, L)))


def random_constrained_points(n: int, rng: np.random.Generator, radius: float = 0.35,
                              min_sep: float = 0.08) -> Tuple[List[complex], List[complex]]:
    while True:
        x = list(rng.uniform(-radius, radius, n) + 1j * rng.uniform(-radius, radius, n))
        if all(abs(x[i] - x[j]) >= min_sep for i in range(n) for j in range(i)):
            break
    y = list(rng.uniform(-radius, radius, n - 1) + 1j * rng.uniform(-radius, radius, n - 1))
    y.append(sum(x) - sum(y))
    return x, y


def flop_pattern_points(rng: np.random.Generator, radius: float = 0.3) -> Tuple[List[complex], List[complex]]:
    """``x = (-A1, B2, B1, -A2)`` and ``y = (B2 - z, B1 - z, -A2 + z, -A1 + z)``."""
    while True:
        A1, A2, B1, B2, z = rng.uniform(-radius, radius, 5) + 1j * rng.uniform(-radius, radius, 5)
        x = [-A1, B2, B1, -A2]
        if all(abs(x[i] - x[j]) >= 0.08 for i in range(4) for j in range(i)):
            return x, [B2 - z, B1 - z, -A2 + z, -A1 + z]


@dataclass
class IdentityReport:
    n: int
    trials: int
    residuals: List[float]
    pattern: str
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals) if self.residuals else 0.0

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol

    def to_json(self) -> dict:
        return {"n": self.n, "trials": self.trials, "pattern": self.pattern, "tol": self.tol,
                "max_residual": self.max_residual, "residuals": self.residuals}


def identity_trials(n: int, trials: int, seed: int = 0, L: LatticeParams = LatticeParams(), tol: float = 1e-8,
                    pattern: str = "random") -> IdentityReport:
    rng = np.random.default_rng([seed, n, 0 if pattern == "random" else 1])
    res = []
    for _ in range(trials):
        if pattern == "flop":
            x, y = flop_pattern_points(rng)
        else:
            x, y = random_constrained_points(n, rng)
        res.append(ww_identity_check(len(x), x, y, L, tol))
    return IdentityReport(n if pattern == "random" else 4, trials, res, pattern, tol)


# ---------------------------------------------------------------------------
# the analytic characteristic series


def taylor_on_circle(fn, N: int, radius: float = 1.0, points: int = 64) -> np.ndarray:
    """Taylor coefficients ``0..N`` of ``fn`` by the discrete Fourier transform on ``|t| = radius``."""
    t = radius * np.exp(2j * np.pi * np.arange(points) / points)
    vals = np.array([fn(complex(tt)) for tt in t])
    c = np.fft.fft(vals) / points
    return np.array([c[n] / radius ** n for n in range(N + 1)])


def krichever_Q_numeric(N: int, z: complex, tau: complex = 1j, k: complex = 0.0, L: Optional[LatticeParams] = None,
                        radius: float = 1.0, points: int = 64) -> np.ndarray:
    """Taylor coefficients of
    ``Q(t) = (t/2 pi i) e^(k t) e^(zeta(z) t / 2 pi i) sigma(t/2 pi i - z) / (sigma(t/2 pi i) sigma(-z))``."""
    L = L or LatticeParams(tau)
    if abs(L.q) > 0.05:
        raise AnalyticError(f"|q| = {abs(L.q):.3g} is too large for reliable lattice sums")
    zz = zeta_eval(z, L)
    s_mz = sigma_eval(-z, L)

    def Q(t: complex) -> complex:
        u = t / TWO_PI_I
        return u * cmath.exp(k * t + zz * u) * sigma_eval(u - z, L) / (sigma_eval(u, L) * s_mz)

    return taylor_on_circle(Q, N, radius, points)


# ---------------------------------------------------------------------------
# q-expansions


@dataclass
class QSeriesNum:
    """``leading(y) + sum_(N >= 1) q^N sum_m c[N][m] y^m`` with ``|m| <= window``."""

    name: str
    leading: str
    coeffs: Dict[int, Dict[int, float]]
    order: int
    window: int

    def leading_value(self, y: complex) -> complex:
        if self.leading == "X":
            return 1 / 12 + y / (1 - y) ** 2
        if self.leading == "Y":
            return y * (1 + y) / (1 - y) ** 3
        return 1 / 12

    def evaluate(self, z: complex, tau: complex) -> complex:
        y = cmath.exp(TWO_PI_I * z)
        q = cmath.exp(TWO_PI_I * tau)
        val = self.leading_value(y)
        for N, row in self.coeffs.items():
            val += q ** N * sum(c * y ** m for m, c in row.items())
        return val


def eisenstein_qseries(Qo: int = 12, Ywin: int = 16) -> Tuple[QSeriesNum, QSeriesNum, QSeriesNum]:
    """``X``, ``Y`` and ``g2`` truncated at ``q^Qo``."""
    if Qo > 16 or Ywin > 16:
        raise AnalyticError("Qo and Ywin are capped at 16")
    if Qo > Ywin:
        raise AnalyticError(f"the y-window {Ywin} cannot hold the q^{Qo} coefficients")
    X: Dict[int, Dict[int, float]] = {}
    Y: Dict[int, Dict[int, float]] = {}
    G: Dict[int, Dict[int, float]] = {}
    for N in range(1, Qo + 1):
        rx: Dict[int, float] = {}
        ry: Dict[int, float] = {}
        for n in range(1, N + 1):
            if N % n:
                continue
            rx[n] = rx.get(n, 0) + n
            rx[-n] = rx.get(-n, 0) + n
            rx[0] = rx.get(0, 0) - 2 * n
            ry[n] = ry.get(n, 0) + n * n
            ry[-n] = ry.get(-n, 0) - n * n
        X[N] = rx
        Y[N] = ry
        G[N] = {0: 240 * sum(d ** 3 for d in range(1, N + 1) if N % d == 0) / 12}
    return (QSeriesNum("X", "X", X, Qo, Ywin), QSeriesNum("Y", "Y", Y, Qo, Ywin),
            QSeriesNum("g2", "g2", G, Qo, Ywin))


# ---------------------------------------------------------------------------
# the bridge


@lru_cache(maxsize=8)
def _algebraic_q(N: int):
    from .weierstrass import krichever_q

    Q = krichever_q(N)
    x = Q.vars.names[Q.vars.positive[0]]
    coeffs = [(s, Q.vars.index[s]) for s in Q.vars.names if s != x]
    ix = Q.vars.index[x]
    rows = []
    for exps, c in Q.items():
        rows.append((exps[ix], float(c), {s: exps[i] for s, i in coeffs if exps[i]}))
    return rows


def algebraic_Q_numeric(N: int, a: Dict[str, complex]) -> np.ndarray:
    out = np.zeros(N + 1, dtype=complex)
    for n, c, mono in _algebraic_q(N):
        if n > N:
            continue
        v = complex(c)
        for s, e in mono.items():
            v *= a[s] ** e
        out[n] += v
    return out


@dataclass
class BridgeReport:
    z: complex
    tau: complex
    k: complex
    N: int
    a: Dict[str, complex]
    analytic: List[complex]
    algebraic: List[complex]
    tol: float
    convention: str = ("t is the series variable of Q(t); a1 = -k, a2 = X, a3 = Y, a4 = g2/2 with "
                       "X, Y, g2 the (2 pi i)-normalized q-expansions")

    @property
    def residuals(self) -> List[float]:
        return [abs(p - q) for p, q in zip(self.analytic, self.algebraic)]

    @property
    def passed(self) -> bool:
        return max(self.residuals[2:self.N + 1], default=0.0) < self.tol

    def to_json(self) -> dict:
        def c(v):
            return [v.real, v.imag]

        return {"z": c(self.z), "tau": c(self.tau), "k": c(self.k), "order": self.N, "convention": self.convention,
                "a": {s: c(v) for s, v in self.a.items()},
                "analytic": [c(v) for v in self.analytic], "algebraic": [c(v) for v in self.algebraic],
                "residuals": self.residuals, "tol": self.tol}


def bridge_coefficients(z: complex, tau: complex, k: complex, Qo: int = 12) -> Dict[str, complex]:
    X, Y, G = eisenstein_qseries(Qo, 16)
    return {"a1": -k, "a2": X.evaluate(z, tau), "a3": Y.evaluate(z, tau), "a4": G.evaluate(z, tau) / 2}


def analytic_algebraic_bridge(z: complex = 0.3, tau: complex = 1j, k: complex = 0.1, N: int = 4,
                              L: Optional[LatticeParams] = None, tol: float = 1e-5, Qo: int = 12) -> BridgeReport:
    if N > 6:
        raise AnalyticError("the bridge supports N <= 6")
    L = L or LatticeParams(tau)
    an = krichever_Q_numeric(N, z, tau, k, L)
    a = bridge_coefficients(z, tau, k, Qo)
    al = algebraic_Q_numeric(N, a)
    return BridgeReport(complex(z), complex(tau), complex(k), N, a, list(an), list(al), tol)
