import json
import subprocess
import sys

import pytest

from fglab import checks
from fglab.checks import REGISTRY, CheckEntry, ConfigError, exit_code, make_config, resolve_jobs, run_check
from fglab.cli import main


def read(path):
    with open(path) as fh:
        return json.load(fh)


def test_delta_check_passes(tmp_path, capsys):
    out = tmp_path / "delta.json"
    assert main(["delta-check", "--json", str(out)]) == 0
    rep = read(out)
    assert rep["check"] == "delta-check"
    assert rep["status"] == "pass"
    assert "witness" in rep
    assert "elapsed" not in rep
    assert "delta-check: PASS" in capsys.readouterr().out


def test_report_schema(tmp_path):
    out = tmp_path / "curve.json"
    assert main(["curve", "--order", "5", "--json", str(out)]) == 0
    rep = read(out)
    assert {"check", "status", "witness", "config"} <= set(rep)
    assert rep["config"]["params"]["order"] == 5


def test_timings_flag(tmp_path):
    out = tmp_path / "t.json"
    main(["delta-check", "--timings", "--json", str(out)])
    assert "elapsed" in read(out)


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["sigma-identity", "--trials", "3", "--seed", "5", "--json", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_failing_check_exits_one(tmp_path):
    out = tmp_path / "flop.json"
    assert main(["flop", "--fgl", "universal", "--degree", "8", "--expect", "zero", "--json", str(out)]) == 1
    rep = read(out)
    assert rep["status"] == "fail"
    assert rep["witness"] is not None


def test_expected_nonzero_passes():
    assert main(["flop", "--fgl", "universal", "--degree", "8", "--expect", "nonzero"]) == 0


def test_sn_flop_table(capsys):
    assert main(["sn-flop", "--n", "4..6", "--table"]) == 0
    out = capsys.readouterr().out
    assert "engine" in out and "formula" in out


def test_unknown_profile_is_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["run-all", "--profile", "medium"])
    assert e.value.code == 2


def test_bad_configuration_exits_two(capsys):
    assert main(["delta-check", "--order", "4"]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_bad_jobs_exits_two(monkeypatch):
    monkeypatch.setenv("FGLAB_JOBS", "many")
    assert main(["delta-check"]) == 2


def test_strict_inconclusive_exits_three(monkeypatch):
    entry = CheckEntry("delta-check", lambda cfg: ("inconclusive", None, {}), "test", {}, {})
    monkeypatch.setitem(REGISTRY, "delta-check", entry)
    assert main(["delta-check"]) == 0
    assert main(["delta-check", "--strict"]) == 3


def test_jobs_fallback(monkeypatch):
    monkeypatch.setenv("FGLAB_JOBS", "3")
    assert resolve_jobs(None) == 3
    assert resolve_jobs(2) == 2
    monkeypatch.delenv("FGLAB_JOBS")
    assert resolve_jobs(None) == 1
    with pytest.raises(ConfigError):
        resolve_jobs(0)


def test_make_config_errors():
    with pytest.raises(ConfigError):
        make_config("no-such-check")
    with pytest.raises(ConfigError):
        make_config("curve", profile="medium")


def test_arithmetic_errors_become_failures(monkeypatch):
    def boom(cfg):
        raise ZeroDivisionError("division by zero")

    monkeypatch.setitem(REGISTRY, "delta-check", CheckEntry("delta-check", boom, "test", {}, {}))
    rep = run_check(make_config("delta-check"))
    assert rep.status == "fail"
    assert "ZeroDivisionError" in rep.witness["error"]


def test_exit_code_ordering():
    mk = lambda s: checks.CheckReport("x", s, None, {}, {})
    assert exit_code([mk("pass"), mk("fail")]) == 1
    assert exit_code([mk("pass"), mk("inconclusive")], strict=True) == 3
    assert exit_code([mk("fail"), mk("inconclusive")], strict=True) == 1
    assert exit_code([mk("pass")]) == 0


def test_run_all_subset(tmp_path, capsys):
    out = tmp_path / "all.json"
    code = main(["run-all", "--only", "delta-check", "--only", "sn-flop", "--json", str(out)])
    assert code == 0
    rep = read(out)
    assert [c["check"] for c in rep["checks"]] == ["delta-check", "sn-flop"]
    assert rep["profile"] == "fast"
    assert "overall: PASS" in capsys.readouterr().out


def test_run_all_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["run-all", "--only", "delta-check", "--only", "verify-k", "--json", str(a)])
    main(["run-all", "--jobs", "2", "--only", "delta-check", "--only", "verify-k", "--json", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_suite_excludes_standalone_checks():
    suite = {n for n, s in REGISTRY.items() if s.in_suite}
    assert "flop" not in suite and "genus" not in suite
    assert {"curve", "krichever", "landweber", "bridge"} <= suite


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "fglab.cli", "delta-check"], capture_output=True, text=True)
    assert r.returncode == 0
    assert "PASS" in r.stdout
