"""The twelve acceptance criteria at their full configurations.

Each test prints one ``PASS`` or ``FAIL`` line and then asserts.  Run with
``pytest tests/test_acceptance.py -v -s`` to see the lines inline.
"""

import time

from fglab.checks import make_config, run_check
from fglab.towers import flop_sn_difference, flop_sn_formula


def report(capsys, number, title, ok, note, elapsed, limit):
    within = elapsed < limit
    status = "PASS" if ok and within else "FAIL"
    with capsys.disabled():
        print(f"\n[criterion {number:2d}] {status} {title}: {note} ({elapsed:.2f} s, limit {limit} s)")
    assert within, f"runtime {elapsed:.1f} s exceeds {limit} s"
    assert ok, note


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def full(name, **overrides):
    return run_check(make_config(name, "full", overrides))


def test_criterion_01_discriminant(capsys):
    r, dt = timed(lambda: full("delta-check"))
    report(capsys, 1, "discriminant identity", r.passed, f"difference zero, b4 matches={r.details['b4_matches']}",
           dt, 1)


def test_criterion_02_weierstrass_law(capsys):
    r, dt = timed(lambda: full("curve", order=8))
    d = r.details
    report(capsys, 2, "Weierstrass law validity", r.passed,
           f"axioms through order {d['validated_through']}, integral={d['integral']}", dt, 30)


def test_criterion_03_flop_vanishing(capsys):
    r, dt = timed(lambda: full("flop-krichever", degree=8))
    report(capsys, 3, "flop vanishing for the elliptic law", r.passed,
           f"numerator zero through degree {r.details['certified_through']}", dt, 300)


def test_criterion_04_towers_equal_closed_form(capsys):
    r, dt = timed(lambda: full("flop-towers", degree=6))
    report(capsys, 4, "towers equal closed form", r.passed,
           f"difference zero through {r.details['difference_order']}, cancellation zero through "
           f"{r.details['cancellation_order']}", dt, 300)


def test_criterion_05_nondegeneracy(capsys):
    r, dt = timed(lambda: full("flop-nondegenerate", degree=6))
    laws = r.details["laws"]
    note = "; ".join(
        f"{law}: numerator zero through degree {v['numerator_zero_through']}, "
        f"class series lowest nonzero degree {v['class_lowest_nonzero_degree']}"
        for law, v in sorted(laws.items()))
    report(capsys, 5, "non-degeneracy control", r.passed, note, dt, 300)


def test_criterion_06_sn_formula(capsys):
    def run():
        return [(n, flop_sn_difference(n), flop_sn_formula(n)) for n in range(4, 11)]

    rows, dt = timed(run)
    values = [int(e) for _, e, _ in rows]
    ok = all(e == f for _, e, f in rows) and values == [0, 5, 7, 14, 18, 27, 33]
    report(capsys, 6, "s^n flop formula", ok, f"engine values {values}", dt, 60)


def test_criterion_07_genus_identifications(capsys):
    r, dt = timed(lambda: full("verify-abcd", order=10))
    report(capsys, 7, "elliptic genus of W1..W4", r.passed,
           "values " + ", ".join(row["expected"] for row in r.details["rows"]), dt, 60)


def test_criterion_08_w_table_and_k_formulas(capsys):
    r, dt = timed(lambda: full("verify-k", dim=4))
    d = r.details
    report(capsys, 8, "W-table and K formulas", r.passed,
           f"{len(d['w_table'])} table equations, products up to dimension {len(d['k_formulas'])}", dt, 120)


def test_criterion_09_landweber(capsys):
    r, dt = timed(lambda: full("landweber"))
    note = ", ".join(f"{p['check']}={p['status']}" for p in r.details["probes"])
    report(capsys, 9, "Landweber probes", r.passed, note, dt, 300)


def test_criterion_10_sigma_identity(capsys):
    r, dt = timed(lambda: full("sigma-identity", trials=100, M=40))
    worst = max(row["max_residual"] for row in r.details["runs"])
    report(capsys, 10, "sigma identity", r.passed, f"worst residual {worst:.2e} over 100 trials each", dt, 60)


def test_criterion_11_bridge(capsys):
    r, dt = timed(lambda: full("bridge", z=0.3, tau=1j, k=0.1))
    worst = max(r.details["residuals"][2:5])
    report(capsys, 11, "analytic bridge", r.passed, f"worst residual on f2..f4 {worst:.2e}", dt, 60)


def test_criterion_12_kernel(capsys):
    r, dt = timed(lambda: full("kernel"))
    report(capsys, 12, "kernel property suites", r.passed,
           f"{len(r.details['results'])} properties on seeded inputs", dt, 60)
