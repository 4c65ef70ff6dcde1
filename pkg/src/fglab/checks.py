"""Static registry of named verifications with fast and full configurations."""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .series import SeriesError

STATUSES = ("pass", "fail", "inconclusive")


class ConfigError(ValueError):
    """Raised for unknown checks, profiles or parameter values."""


@dataclass
class CheckConfig:
    name: str
    params: Dict[str, object] = field(default_factory=dict)
    seed: int = 0
    tol: Optional[float] = None
    primes: Optional[Tuple[int, ...]] = None

    def get(self, key: str, default=None):
        return self.params.get(key, default)


@dataclass
class CheckReport:
    check: str
    status: str
    witness: object
    details: Dict[str, object]
    config: Dict[str, object]
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self, timings: bool = False) -> dict:
        extra = {k: v for k, v in self.details.items() if k not in ("check", "status", "witness", "config")}
        out = {"check": self.check, "status": self.status, "witness": self.witness, **extra, "config": self.config}
        if timings:
            out["elapsed"] = round(self.elapsed, 3)
        return out


@dataclass
class CheckEntry:
    name: str
    run: Callable[[CheckConfig], Tuple[str, object, dict]]
    module: str
    fast: Dict[str, object]
    full: Dict[str, object]
    order_param: Optional[str] = None
    default_tol: Optional[float] = None
    description: str = ""
    in_suite: bool = True


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


# ---------------------------------------------------------------------------
# check bodies


def _delta(cfg: CheckConfig):
    from .weierstrass import discriminant_check

    r = discriminant_check()
    return r.status, r.witness, r.details


def _curve(cfg: CheckConfig):
    from .fgl import FGLValidationError
    from .weierstrass import WeierstrassCurve, curve_formal_group, curve_invariants

    N = int(cfg.get("order"))
    if N < 3:
        raise ConfigError("curve needs order >= 3")
    mu = cfg.get("mu")
    C = WeierstrassCurve.generic() if mu is None else WeierstrassCurve.from_values(mu)
    try:
        F = curve_formal_group(C, N, check_order=min(N, 8))
    except FGLValidationError as e:
        return "fail", {"axiom": e.axiom, "monomial": str(e.monomial)}, {}
    integral = F.F.is_integral()
    details = {"order": N, "terms": len(F.F), "integral": integral, "validated_through": min(N, 8)}
    if mu is not None:
        inv = curve_invariants(C)
        details["delta"] = str(inv.delta.constant_term())
        num, den = inv.j
        details["j"] = None if den.is_zero() else str(num.constant_term() / den.constant_term())
    witness = None if integral else str(F.F.non_integral_witness())
    return _status(integral), witness, details


def _krichever(cfg: CheckConfig):
    from .weierstrass import krichever_curve_fgl, krichever_fgl

    N = int(cfg.get("order"))
    F = krichever_fgl(N, check_order=min(N, 8))
    homog = F.F.is_homogeneous(1)
    phi = krichever_curve_fgl(min(N, 8), integral=True, check_order=None)
    details = {"order": N, "terms": len(F.F), "homogeneous_degree_1": homog,
               "phi_curve_law_integral": phi.F.is_integral(),
               "elliptic_law_non_integral_witness": str(F.F.non_integral_witness())}
    if cfg.get("dump"):
        details["series"] = F.F.to_json()
    return _status(homog and phi.F.is_integral()), None if homog else str(F.F.inhomogeneous_witness(1)), details


LAWS = ("additive", "multiplicative", "universal", "krichever", "weierstrass", "weierstrass-phi")
EXPECT = {"additive": "zero", "krichever": "zero", "multiplicative": "nonzero", "universal": "nonzero",
          "weierstrass": "nonzero", "weierstrass-phi": "nonzero"}


def build_law(name: str, order: int):
    from .fgl import additive_fgl, multiplicative_fgl, universal_fgl
    from .weierstrass import WeierstrassCurve, curve_formal_group, krichever_curve_fgl, krichever_fgl

    if name == "additive":
        return additive_fgl(order)
    if name == "multiplicative":
        return multiplicative_fgl(order)
    if name == "universal":
        return universal_fgl(order, check_order=None)
    if name == "krichever":
        return krichever_fgl(order, check_order=None)
    if name == "weierstrass":
        return curve_formal_group(WeierstrassCurve.generic(), order, check_order=None)
    if name == "weierstrass-phi":
        return krichever_curve_fgl(order, integral=False, check_order=None)
    raise ConfigError(f"unknown law {name!r}; choose from {', '.join(LAWS)}")


def flop_report(law: str, degree: int, margin: int = 6) -> dict:
    from .flop import flop_closed_form

    F = build_law(law, degree + margin)
    R = flop_closed_form(F, margin)
    rows = R.degree_report(degree)
    nonzero = [r for r in rows if not r["numerator_zero"]]
    P = R.class_series()
    class_val = P.valuation()
    class_witness = None
    if class_val is not None:
        piece = P.graded()[class_val]
        k = min(piece, key=P.vars.unpack)
        class_witness = {"monomial": P.vars.monomial_str(k), "coefficient": str(piece[k])}
    return {
        "law": law, "degree": degree, "fgl_order": R.fgl_order, "margin": margin,
        "certified_through": min(degree, R.valid_order), "degrees": rows,
        "numerator_zero": not nonzero, "lowest_nonzero_degree": nonzero[0]["degree"] if nonzero else None,
        "witness": nonzero[0]["nonzero_witness"] if nonzero else None,
        "class_series_order": P.order, "class_lowest_nonzero_degree": class_val,
        "class_witness": class_witness,
    }


def _flop(cfg: CheckConfig):
    law = cfg.get("law")
    degree = int(cfg.get("degree"))
    if degree < 0:
        raise ConfigError("degree must be >= 0")
    if law not in LAWS:
        raise ConfigError(f"unknown law {law!r}")
    rep = flop_report(law, degree)
    expect = cfg.get("expect") or EXPECT[law]
    ok = rep["numerator_zero"] if expect == "zero" else not rep["numerator_zero"]
    rep["expect"] = expect
    if cfg.get("via_towers"):
        rep["towers"] = tower_report(law, int(cfg.get("tower_order", degree + 7)))
        ok = ok and rep["towers"]["agree"]
    return _status(ok), rep.pop("witness"), rep


def tower_report(law: str, order: int) -> dict:
    from .flop import flop_closed_form, flop_via_towers

    F = build_law(law, order)
    P = flop_closed_form(F).class_series()
    TT = flop_via_towers(F)
    diff = TT.difference - P
    canc = TT.cancellation
    return {"law": law, "fgl_order": order, "cancellation_zero": canc.is_zero(), "cancellation_order": canc.order,
            "difference_zero": diff.is_zero(), "difference_order": diff.order,
            "agree": canc.is_zero() and diff.is_zero()}


def _flop_towers(cfg: CheckConfig):
    degree = int(cfg.get("degree"))
    order = degree + 7
    rep = tower_report("universal", order)
    ok = rep["agree"] and rep["difference_order"] >= degree and rep["cancellation_order"] >= degree
    rep["degree"] = degree
    return _status(ok), None, rep


def _flop_krichever(cfg: CheckConfig):
    cfg = CheckConfig(cfg.name, {**cfg.params, "law": "krichever", "expect": "zero"}, cfg.seed, cfg.tol)
    return _flop(cfg)


def _flop_nondegenerate(cfg: CheckConfig):
    degree = int(cfg.get("degree"))
    laws = cfg.get("laws") or ("universal", "multiplicative")
    reps = {law: flop_report(law, degree) for law in laws}
    ok = all(not r["numerator_zero"] for r in reps.values())
    witness = {law: r["witness"] for law, r in reps.items()}
    summary = {law: {"numerator_zero_through": r["certified_through"] if r["numerator_zero"] else None,
                     "lowest_nonzero_degree": r["lowest_nonzero_degree"],
                     "class_lowest_nonzero_degree": r["class_lowest_nonzero_degree"],
                     "class_series_order": r["class_series_order"],
                     "class_witness": r["class_witness"]}
               for law, r in reps.items()}
    return _status(ok), witness, {"degree": degree, "laws": summary}


def _sn_flop(cfg: CheckConfig):
    from .towers import flop_sn_difference, flop_sn_formula

    lo, hi = cfg.get("n_range")
    if lo < 4 or hi > 12 or lo > hi:
        raise ConfigError("sn-flop needs 4 <= n <= 12")
    rows = []
    for n in range(lo, hi + 1):
        e, f = flop_sn_difference(n), flop_sn_formula(n)
        rows.append({"n": n, "engine": str(e), "formula": str(f), "match": e == f})
    ok = all(r["match"] for r in rows)
    return _status(ok), None if ok else [r for r in rows if not r["match"]], {"table": rows}


def _verify_abcd(cfg: CheckConfig):
    from .genus import krichever_abcd

    r = krichever_abcd(int(cfg.get("order")))
    return _status(r["ok"]), None if r["ok"] else [x for x in r["rows"] if not x["match"]], {"rows": r["rows"]}


def _verify_k(cfg: CheckConfig):
    from .genus import k_formula_check, universal_todd_data, w_table_check

    dmax = int(cfg.get("dim"))
    if not 1 <= dmax <= 4:
        raise ConfigError("verify-k supports dimensions 1..4")
    wt = w_table_check()
    T = universal_todd_data(max(dmax, 4) + 1)
    ks = [k_formula_check(T, d) for d in range(1, dmax + 1)]
    ok = all(r["ok"] for r in wt) and all(k["ok"] for k in ks)
    bad = [r for r in wt if not r["ok"]] + [r for k in ks for r in k["rows"] if not r["match"]]
    return _status(ok), bad or None, {"w_table": wt, "k_formulas": ks}


def _genus(cfg: CheckConfig):
    from .genus import (
        additive_todd_data,
        genus_product,
        krichever_todd_data,
        mishchenko_log,
        products_of_dimension,
        todd_genus_data,
        universal_todd_data,
    )

    kind = cfg.get("todd", "krichever")
    dim = int(cfg.get("dim"))
    makers = {"todd": todd_genus_data, "additive": additive_todd_data, "krichever": krichever_todd_data,
              "universal": universal_todd_data}
    if kind not in makers:
        raise ConfigError(f"unknown genus {kind!r}; choose from {', '.join(makers)}")
    T = makers[kind](dim + 1)
    rows = []
    for d in range(1, dim + 1):
        for P in products_of_dimension(d):
            rows.append({"product": str(P), "genus": genus_product(T, P).to_str()})
    log_ok = True
    if kind != "universal":
        from .fgl import ExponentialPair

        g = ExponentialPair.from_exp(T.lam).log.truncate(dim + 1)
        log_ok = mishchenko_log(T).truncate(dim + 1) == g
    return _status(log_ok), None, {"genus": kind, "rows": rows, "mishchenko_log_matches": log_ok}


def _landweber(cfg: CheckConfig):
    from .landweber import supersingular_probe, v0_check, v2_unit_probe

    primes = tuple(cfg.primes or cfg.get("primes"))
    for l in primes:
        if l not in (2, 3, 5, 7):
            raise ConfigError("landweber probes support l in {2, 3, 5, 7}")
    results = [v0_check(primes)] + [supersingular_probe(l) for l in primes]
    odd = [l for l in primes if l != 2]
    v2_primes = cfg.get("v2_primes", (3,))
    for l in odd:
        if l in v2_primes:
            results.append(v2_unit_probe(l, cfg.get("v2_budget"), cfg.seed))
    statuses = [r.status for r in results]
    status = "fail" if "fail" in statuses else ("inconclusive" if "inconclusive" in statuses else "pass")
    witness = {r.check: r.witness for r in results if r.status != "pass"} or None
    return status, witness, {"probes": [r.to_json() for r in results]}


def _sigma_identity(cfg: CheckConfig):
    from .analytic import LatticeParams, identity_trials

    tol = cfg.tol if cfg.tol is not None else 1e-8
    trials = int(cfg.get("trials"))
    L = LatticeParams(1j, int(cfg.get("M", 40)))
    ns = cfg.get("ns")
    reps = [identity_trials(n, trials, cfg.seed, L, tol) for n in ns]
    if cfg.get("flop_pattern", True):
        reps.append(identity_trials(4, trials, cfg.seed, L, tol, pattern="flop"))
    ok = all(r.passed for r in reps)
    summary = [{"n": r.n, "pattern": r.pattern, "trials": r.trials, "max_residual": r.max_residual} for r in reps]
    return _status(ok), None if ok else [s for s, r in zip(summary, reps) if not r.passed], {"tol": tol, "runs": summary}


def _bridge(cfg: CheckConfig):
    from .analytic import analytic_algebraic_bridge

    tol = cfg.tol if cfg.tol is not None else 1e-5
    N = int(cfg.get("order"))
    if not 2 <= N <= 6:
        raise ConfigError("bridge supports order 2..6")
    r = analytic_algebraic_bridge(complex(cfg.get("z")), complex(cfg.get("tau")), complex(cfg.get("k")), N, tol=tol)
    js = r.to_json()
    worst = max(r.residuals[2:N + 1])
    js["max_residual_f2_up"] = worst
    return _status(r.passed), None if r.passed else {"max_residual": worst}, js


def _kernel(cfg: CheckConfig):
    from .selftest import run_selftest

    r = run_selftest(cfg.seed, int(cfg.get("trials")))
    return _status(r.passed), r.failures or None, {"results": r.results}


REGISTRY: Dict[str, CheckEntry] = {s.name: s for s in [
    CheckEntry("delta-check", _delta, "weierstrass", {}, {}, description="discriminant of the phi-curve"),
    CheckEntry("curve", _curve, "weierstrass", {"order": 6}, {"order": 8}, "order",
              description="generic Weierstrass law: axioms and integrality"),
    CheckEntry("krichever", _krichever, "weierstrass", {"order": 6}, {"order": 10}, "order",
              description="elliptic law: homogeneity and validation"),
    CheckEntry("flop-krichever", _flop_krichever, "flop", {"degree": 6}, {"degree": 8}, "degree",
              description="flop numerator of the elliptic law vanishes"),
    CheckEntry("flop-towers", _flop_towers, "flop", {"degree": 4}, {"degree": 6}, "degree",
              description="tower pushforwards reproduce the closed form"),
    CheckEntry("flop-nondegenerate", _flop_nondegenerate, "flop", {"degree": 6}, {"degree": 6}, "degree",
              description="universal and multiplicative flop numerators are nonzero in low degree"),
    CheckEntry("sn-flop", _sn_flop, "towers", {"n_range": (4, 7)}, {"n_range": (4, 10)},
              description="s^n flop difference against its closed formula"),
    CheckEntry("verify-abcd", _verify_abcd, "genus", {"order": 6}, {"order": 10}, "order",
              description="elliptic genus of the W-classes"),
    CheckEntry("verify-k", _verify_k, "genus", {"dim": 4}, {"dim": 4}, "dim",
              description="W-class Chern numbers and K-formulas"),
    CheckEntry("landweber", _landweber, "landweber", {"primes": (2, 3, 5, 7), "v2_budget": 300},
              {"primes": (2, 3, 5, 7), "v2_budget": None}, description="v0, v1 and v2 probes"),
    CheckEntry("sigma-identity", _sigma_identity, "analytic", {"trials": 20, "ns": (2, 3, 4)},
              {"trials": 100, "ns": (2, 3, 4)}, default_tol=1e-8, description="sigma-function identity"),
    CheckEntry("bridge", _bridge, "analytic", {"order": 4, "z": 0.3, "tau": 1j, "k": 0.1},
              {"order": 4, "z": 0.3, "tau": 1j, "k": 0.1}, "order", default_tol=1e-5,
              description="analytic versus algebraic characteristic series"),
    CheckEntry("flop", _flop, "flop", {"law": "krichever", "degree": 6}, {"law": "krichever", "degree": 8},
              "degree", description="flop numerator for a chosen law", in_suite=False),
    CheckEntry("genus", _genus, "genus", {"todd": "krichever", "dim": 4}, {"todd": "krichever", "dim": 4}, "dim",
              description="genera of products of projective spaces", in_suite=False),
    CheckEntry("kernel", _kernel, "selftest", {"trials": 10}, {"trials": 30},
              description="series and FGL kernel properties"),
]}

PROFILES = ("fast", "full")


def make_config(name: str, profile: str = "full", overrides: Optional[Dict[str, object]] = None, seed: int = 0,
                tol: Optional[float] = None, primes: Optional[Sequence[int]] = None,
                order: Optional[int] = None) -> CheckConfig:
    if name not in REGISTRY:
        raise ConfigError(f"unknown check {name!r}")
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; choose fast or full")
    entry = REGISTRY[name]
    params = dict(entry.fast if profile == "fast" else entry.full)
    if order is not None:
        if entry.order_param is None:
            raise ConfigError(f"check {name} has no order parameter")
        params[entry.order_param] = order
    params.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return CheckConfig(name, params, seed, tol if tol is not None else entry.default_tol,
                       tuple(primes) if primes else None)


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def run_check(cfg: CheckConfig) -> CheckReport:
    if cfg.name not in REGISTRY:
        raise ConfigError(f"unknown check {cfg.name!r}")
    entry = REGISTRY[cfg.name]
    echo = _jsonable({"params": cfg.params, "seed": cfg.seed, "tol": cfg.tol, "primes": cfg.primes})
    t0 = time.perf_counter()
    try:
        status, witness, details = entry.run(cfg)
    except ConfigError:
        raise
    except (SeriesError, ArithmeticError) as e:
        status, witness, details = "fail", {"error": f"{type(e).__name__}: {e}"}, {}
    if status not in STATUSES:
        raise RuntimeError(f"check {cfg.name} returned invalid status {status!r}")
    return CheckReport(cfg.name, status, _jsonable(witness), _jsonable(details), echo, time.perf_counter() - t0)


def resolve_jobs(jobs: Optional[int]) -> int:
    if jobs is None:
        env = os.environ.get("FGLAB_JOBS")
        if env:
            try:
                jobs = int(env)
            except ValueError:
                raise ConfigError(f"FGLAB_JOBS must be an integer, got {env!r}")
        else:
            jobs = 1
    if jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    return jobs


def run_all(profile: str = "fast", jobs: Optional[int] = None, seed: int = 0,
            names: Optional[Sequence[str]] = None) -> List[CheckReport]:
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; choose fast or full")
    jobs = resolve_jobs(jobs)
    suite = [n for n, s in REGISTRY.items() if s.in_suite]
    cfgs = [make_config(n, profile, seed=seed) for n in (names or suite)]
    if jobs == 1:
        reports = [run_check(c) for c in cfgs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            reports = list(ex.map(run_check, cfgs))
    return sorted(reports, key=lambda r: r.check)


def overall_status(reports: Sequence[CheckReport]) -> str:
    st = [r.status for r in reports]
    if "fail" in st:
        return "fail"
    if "inconclusive" in st:
        return "inconclusive"
    return "pass"


def exit_code(reports: Sequence[CheckReport], strict: bool = False) -> int:
    s = overall_status(reports)
    if s == "fail":
        return 1
    if s == "inconclusive" and strict:
        return 3
    return 0
