import csv
import io
import json
import shutil
import subprocess

import pytest

from fockweyl.cli import (EXIT_CONFIG, EXIT_FAIL, EXIT_NONCONV, EXIT_OK, OUT_ENV, SCHEMA_VERSION, ConfigError,
                          load_config, main, report_render)


def write_config(path, scenarios, **top):
    path.write_text(json.dumps({"scenarios": scenarios, **top}))
    return path


def run(tmp_path, scenarios, name="out", extra=(), **top):
    cfg = write_config(tmp_path / f"{name}.json", scenarios, **top)
    out = tmp_path / name
    code = main(["run", str(cfg), "--out", str(out), *extra])
    return code, out


def read_rows(out):
    return list(csv.DictReader(io.StringIO((out / "results.csv").read_text())))


def test_constants_selftest(tmp_path, capsys):
    code, out = run(tmp_path, [{"scenario": "constants-selftest"}])
    assert code == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["schema_version"] == SCHEMA_VERSION
    assert summary["passed"] and summary["exit_code"] == 0
    assert summary["scenarios"][0]["schur_constant"] == pytest.approx(1.25331, abs=1e-5)
    assert "constants" in capsys.readouterr().out


def test_convergence_columns(tmp_path):
    code, out = run(tmp_path, [{"scenario": "convergence", "n_modes": 3, "cap": 5}], seed=0)
    assert code == EXIT_OK
    rows = read_rows(out)
    assert set(["n", "est_norm_diff", "diff_bound", "ratio"]) <= set(rows[0])
    assert [int(r["n"]) for r in rows] == [0, 1, 2]
    assert all(float(r["ratio"]) <= 1 for r in rows)


@pytest.mark.parametrize("text", [
    "{not json",
    "[]",
    json.dumps({"scenarios": []}),
    json.dumps({"scenarios": [{"scenario": "nope"}]}),
    json.dumps({"scenarios": [{"scenario": "quantize", "h": 1.5, "symbol": {"kind": "cosine", "y": [1], "eta": [0]}}]}),
    json.dumps({"scenarios": [{"scenario": "quantize", "quantizer": "hybrid", "E": [3],
                               "symbol": {"kind": "cosine", "y": [1], "eta": [0]}}]}),
    json.dumps({"scenarios": [{"scenario": "measure-mc"}]}),
    json.dumps({"scenarios": [{"scenario": "quantize", "backend": "quadrature",
                               "symbol": {"kind": "cosine", "y": [1], "eta": [0]}}]}),
    json.dumps({"seed": -1, "scenarios": [{"scenario": "constants-selftest"}]}),
])
def test_malformed_config_writes_nothing(tmp_path, text):
    cfg = tmp_path / "bad.json"
    cfg.write_text(text)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()


def test_missing_config_file(tmp_path):
    assert main(["run", str(tmp_path / "absent.json"), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_validation_happens_before_running(tmp_path):
    # the first scenario is valid but must not run when a later one is malformed
    cfg = write_config(tmp_path / "c.json", [{"scenario": "constants-selftest"}, {"scenario": "bogus"}])
    with pytest.raises(ConfigError):
        load_config(cfg)


QUANTIZE = {"scenario": "quantize", "name": "cos-mc", "quantizer": "anti_wick", "cross_check": "mc",
            "mc_samples": 20000, "h": 0.5, "cap": 4,
            "symbol": {"kind": "cosine", "y": [0.8], "eta": [0.3], "amplitude": 1.0}}


def test_run_is_deterministic(tmp_path):
    scen = [QUANTIZE, {"scenario": "constants-selftest"}]
    c1, o1 = run(tmp_path, scen, name="a", seed=11)
    c2, o2 = run(tmp_path, scen, name="b", seed=11)
    assert c1 == c2 == EXIT_OK
    for f in ("results.csv", "summary.json"):
        assert (o1 / f).read_bytes() == (o2 / f).read_bytes()


def test_seed_flag_overrides_config(tmp_path):
    _, o1 = run(tmp_path, [QUANTIZE], name="a", seed=1, extra=["--seed", "5"])
    _, o2 = run(tmp_path, [QUANTIZE], name="b", seed=5)
    assert json.loads((o1 / "summary.json").read_text())["seed"] == 5
    assert (o1 / "results.csv").read_bytes() == (o2 / "results.csv").read_bytes()


def test_summary_records_orders_samples_and_calibration(tmp_path):
    code, out = run(tmp_path, [QUANTIZE], seed=3)
    assert code == EXIT_OK
    s = json.loads((out / "summary.json").read_text())["scenarios"][0]
    assert s["mc_samples"] == 20000
    assert s["quadrature_orders"] and all(q["converged"] for q in s["quadrature_orders"])
    assert s["calibration"]
    names = {c["name"] for c in s["checks"]}
    assert {"hermitian", "norm_within_bound", "cross_check_mc"} <= names


def test_csv_uses_seventeen_digits(tmp_path):
    _, out = run(tmp_path, [{"scenario": "quantize", "h": 0.5, "cap": 6,
                             "symbol": {"kind": "cosine", "y": [0.7], "eta": [0.2]}}])
    norm = read_rows(out)[0]["norm"]
    assert float(norm) == float(format(float(norm), ".17g"))
    assert (out / "results.csv").read_text().endswith("\n")


def test_failed_check_exit_code(tmp_path):
    # a deliberately undersized certificate makes the norm exceed the bound
    scen = {"scenario": "quantize", "h": 1.0, "cap": 6,
            "symbol": {"kind": "cosine", "y": [0.5], "eta": [0.0], "amplitude": 1.0,
                       "cert": {"M": 1e-4, "eps": [0.5], "order": 2}}}
    code, out = run(tmp_path, [scen])
    assert code == EXIT_FAIL
    s = json.loads((out / "summary.json").read_text())
    assert not s["passed"] and s["scenarios"][0]["status"] == "fail"


def test_nonconvergence_exit_code(tmp_path):
    scen = {"scenario": "quantize", "h": 1.0, "cap": 6, "backend": "wigner",
            "symbol": {"kind": "cosine", "y": [40.0], "eta": [0.0]}, "max_order": 16}
    code, out = run(tmp_path, [scen])
    assert code == EXIT_NONCONV
    s = json.loads((out / "summary.json").read_text())
    assert s["scenarios"][0]["status"] == "nonconvergence"
    assert "NONCONV" in report_render(s)


def test_output_directory_precedence(tmp_path, monkeypatch):
    cfg = write_config(tmp_path / "c.json", [{"scenario": "constants-selftest"}],
                       output_dir=str(tmp_path / "from_config"))
    assert main(["run", str(cfg)]) == EXIT_OK
    assert (tmp_path / "from_config" / "summary.json").exists()
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "from_env"))
    assert main(["run", str(cfg)]) == EXIT_OK
    assert (tmp_path / "from_env" / "summary.json").exists()
    assert main(["run", str(cfg), "--out", str(tmp_path / "from_flag")]) == EXIT_OK
    assert (tmp_path / "from_flag" / "summary.json").exists()


def test_report_empty_summary_is_header_only():
    text = report_render({"scenarios": []})
    lines = text.splitlines()
    assert len(lines) == 2
    assert lines[0].split() == ["scenario", "suite", "check", "value", "threshold", "status"]


def test_report_verify_bound_rows(tmp_path):
    scen = {"scenario": "verify-bound", "hs": [1.0], "caps": {"1": 8},
            "symbols": [{"kind": "cosine", "name": "c1", "y": [0.6], "eta": [0.4]}]}
    code, out = run(tmp_path, [scen])
    assert code == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    text = report_render(summary)
    assert "slack" in text and "bound" in text
    body = [ln for ln in text.splitlines() if ln.startswith(summary["scenarios"][0]["name"]) and " c1 " in ln]
    # Weyl, the hybrids for the empty and the full set, and one difference
    assert len(body) == 4
    assert report_render(summary) == text


def test_report_command_is_byte_stable(tmp_path, capsys):
    _, out = run(tmp_path, [{"scenario": "constants-selftest"}])
    capsys.readouterr()
    assert main(["report", str(out / "summary.json")]) == EXIT_OK
    first = capsys.readouterr().out
    assert main(["report", str(out / "summary.json")]) == EXIT_OK
    assert capsys.readouterr().out == first
    assert first == report_render(json.loads((out / "summary.json").read_text()))


def test_selftest_command(tmp_path, capsys):
    assert main(["selftest", "--out", str(tmp_path / "st")]) == EXIT_OK
    s = json.loads((tmp_path / "st" / "summary.json").read_text())
    suites = {c["suite"] for c in s["scenarios"][0]["checks"]}
    assert {"hermite", "constants", "bargmann"} <= suites
    assert "FAIL" not in capsys.readouterr().out


@pytest.mark.skipif(shutil.which("fockweyl") is None, reason="console script not installed")
def test_console_script(tmp_path):
    cfg = write_config(tmp_path / "c.json", [{"scenario": "constants-selftest"}])
    proc = subprocess.run(["fockweyl", "run", str(cfg), "--out", str(tmp_path / "o"), "--threads", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    proc = subprocess.run(["fockweyl", "run", str(bad), "--out", str(tmp_path / "o2")], capture_output=True)
    assert proc.returncode == 2


def test_hybrid_direct_route_converges_under_strict_mode(tmp_path):
    scen = {"scenario": "quantize", "quantizer": "hybrid", "E": [0], "h": 0.5, "cap": 8,
            "symbol": {"kind": "cosine", "y": [0.8, -0.3], "eta": [0.2, 0.5]},
            "backend": "direct", "cross_check": "reduced", "tolerance": 1e-6}
    code, out = run(tmp_path, [scen])
    assert code == EXIT_OK
    checks = json.loads((out / "summary.json").read_text())["scenarios"][0]["checks"]
    assert any(c["name"] == "cross_check_reduced" and c["passed"] for c in checks)
