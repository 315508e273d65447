"""Batch experiment driver.

``fockweyl run config.json`` validates the whole config before computing anything, runs the
scenarios in order and writes ``results.csv`` and ``summary.json`` into the output directory.
``fockweyl selftest`` runs the built-in invariant suites and ``fockweyl report`` renders a
summary as a text table.

Exit codes: 0 all checks pass, 1 an invariant failed, 2 configuration error (nothing written),
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .bounds import SymbolClassCert, cv_bound, operator_norm_lower, paper_constants_selftest
from .core_index import ModeSet, Truncation
from .experiments import BatteryCase, convergence_experiment, default_battery, run_bound_battery
from .quantize import GaussSymbol, QuantizationConfig, anti_wick_matrix, hybrid_matrix, weyl_matrix
from .quantize.weyl import calibration_log
from .selftest import SUITES, Check, constants_suite, measure_suite, run_suites
from .symbols import cosine_symbol, example15_family, lattice_gaussian, trig_from_atoms

SCHEMA_VERSION = "1"
OUT_ENV = "FOCKWEYL_OUT"
SCENARIOS = ("quantize", "verify-bound", "convergence", "bargmann-selftest", "measure-mc", "constants-selftest")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NONCONV = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioResult:
    name: str
    scenario: str
    checks: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    log: dict = field(default_factory=dict)
    mc_samples: int = 0
    extra: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def status(self) -> str:
        if self.error is not None:
            return "nonconvergence"
        return "pass" if all(c.passed for c in self.checks) else "fail"

    def as_dict(self) -> dict:
        orders = {}
        for rec in self.log.get("quadrature_orders", []):
            key = (rec["what"], rec["order"], rec["converged"])
            orders[key] = orders.get(key, 0) + 1
        out = {
            "name": self.name,
            "scenario": self.scenario,
            "status": self.status,
            "checks": [c.as_dict() for c in self.checks],
            "quadrature_orders": [{"what": w, "order": o, "converged": c, "count": n}
                                  for (w, o, c), n in sorted(orders.items())],
            "mc_samples": self.mc_samples,
            "calibration": [self.log["calibration"][k] for k in sorted(self.log.get("calibration", {}))],
        }
        if self.error is not None:
            out["error"] = self.error
        out.update(self.extra)
        return out


# ---------------------------------------------------------------- config parsing

def _req(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}: missing field {key!r}")
    return d[key]


def _h(value, where: str) -> float:
    try:
        h = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: h must be a number") from None
    if not (0 < h <= 1):
        raise ConfigError(f"{where}: h must lie in (0, 1], got {h}")
    return h


def _positive_int(value, where: str, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{where}: {name} must be a positive integer")
    return value


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError("complex coefficients are given as [re, im]")
        return complex(float(v[0]), float(v[1]))
    return complex(float(v))


def _cert_from_spec(spec: dict, modes: ModeSet) -> SymbolClassCert:
    eps = spec.get("eps", 1.0)
    if isinstance(eps, (int, float)):
        eps = {j: float(eps) for j in modes.ids}
    else:
        if len(eps) != len(modes):
            raise ConfigError("cert eps must list one value per mode")
        eps = {j: float(e) for j, e in zip(modes.ids, eps)}
    return SymbolClassCert(float(spec.get("M", 1.0)), eps, int(spec.get("order", 2)))


def build_symbol(spec: dict, where: str = "symbol"):
    """Symbol and its certificate (or None) from a symbol spec."""
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected an object")
    kind = _req(spec, "kind", where)
    try:
        if kind == "cosine":
            y = np.atleast_1d(np.asarray(_req(spec, "y", where), dtype=float))
            eta = np.atleast_1d(np.asarray(_req(spec, "eta", where), dtype=float))
            if y.shape != eta.shape:
                raise ConfigError(f"{where}: y and eta must have the same length")
            F, cert = cosine_symbol(ModeSet.range(len(y)), y, eta, float(spec.get("amplitude", 1.0)))
        elif kind == "trig":
            atoms = [(a["y"], a["eta"], _complex(a.get("c", 1.0))) for a in _req(spec, "atoms", where)]
            n = len(np.atleast_1d(atoms[0][0])) if atoms else 0
            if any(len(np.atleast_1d(a[0])) != n or len(np.atleast_1d(a[1])) != n for a in atoms):
                raise ConfigError(f"{where}: every atom needs y and eta over the same modes")
            F, cert = trig_from_atoms(atoms, ModeSet.range(n), int(spec.get("order", 2)))
        elif kind == "lattice_gaussian":
            L = lattice_gaussian(int(spec.get("d", 1)), _req(spec, "window", where), spec.get("g", 1.0),
                                 float(spec.get("lambda", 0.0)), spec.get("norm", "sup"))
            F = L.symbol
            cert = L.suggested_cert(int(spec.get("order", 2)), seed=int(spec.get("fit_seed", 0)))
        elif kind == "example15":
            N = _positive_int(_req(spec, "N", where), where, "N")
            fam, _ = example15_family([N], include_diagonal=bool(spec.get("include_diagonal", True)),
                                      order=int(spec.get("order", 2)), C1=spec.get("C1"))
            F, cert = fam[0].symbol, fam[0].cert
        elif kind == "gauss":
            n = _positive_int(_req(spec, "modes", where), where, "modes")
            terms = [(_complex(t.get("c", 1.0)), t["A"]) for t in _req(spec, "terms", where)]
            F, cert = GaussSymbol(ModeSet.range(n), terms), None
        else:
            raise ConfigError(f"{where}: unknown symbol kind {kind!r}")
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    if "cert" in spec:
        try:
            cert = _cert_from_spec(spec["cert"], F.modes)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}.cert: {exc}") from None
    return F, cert


def _mode_subset(ids, modes: ModeSet, where: str) -> ModeSet:
    ids = tuple(ids)
    missing = [j for j in ids if j not in modes.ids]
    if missing:
        raise ConfigError(f"{where}: modes {missing} are not modes of the symbol")
    return ModeSet(tuple(sorted(set(ids))))


@dataclass
class Plan:
    name: str
    scenario: str
    run: Callable[[ScenarioResult], None]


BACKENDS = {"weyl": ("translation", "gaussian", "wigner", "frame"),
            "anti_wick": ("quadrature", "heat", "mc"),
            "hybrid": ("kernel", "reduced", "direct", "direct_frame")}


def _plan_quantize(p: dict, where: str, seed: int | None) -> Callable:
    F, cert = build_symbol(_req(p, "symbol", where), where + ".symbol")
    h = _h(p.get("h", 1.0), where)
    cap = _positive_int(p.get("cap", 8), where, "cap")
    quantizer = p.get("quantizer", "weyl")
    if quantizer not in ("weyl", "anti_wick", "hybrid"):
        raise ConfigError(f"{where}: unknown quantizer {quantizer!r}")
    E = _mode_subset(p.get("E", []), F.modes, where + ".E") if quantizer == "hybrid" else None
    backend = p.get("backend")
    cross = p.get("cross_check")
    for b in (backend, cross):
        if b is not None and b not in BACKENDS[quantizer]:
            raise ConfigError(f"{where}: unknown {quantizer} backend {b!r}; expected one of {', '.join(BACKENDS[quantizer])}")
    tol = float(p.get("tolerance", 1e-6))
    mc = _positive_int(p.get("mc_samples", 100_000), where, "mc_samples")
    max_order = _positive_int(p.get("max_order", 64), where, "max_order")
    uses_mc = backend == "mc" or cross == "mc"
    if uses_mc and seed is None:
        raise ConfigError(f"{where}: Monte Carlo needs a seed")

    def matrix(cfg, which):
        if quantizer == "weyl":
            return weyl_matrix(F, cfg, which)
        if quantizer == "anti_wick":
            return anti_wick_matrix(F, cfg, which)
        return hybrid_matrix(F, E, cfg, which)

    def run(res: ScenarioResult):
        cfg = QuantizationConfig(h, Truncation(F.modes, cap, cap), max_order=max_order, mc_samples=mc,
                                 seed=seed or 0, strict=True, log=res.log)
        # the translation sign convention is recorded for every quantize run, whichever backend is used
        calibration_log(cfg)
        A = matrix(cfg, backend)
        norm = operator_norm_lower(A.entries)
        row = {"case": F.kind, "quantity": quantizer, "h": h, "cap": cap, "dim": A.entries.shape[0], "norm": norm}
        if F.is_real():
            herm = float(np.max(np.abs(A.entries - A.entries.conj().T)))
            res.checks.append(Check("quantize", "hermitian", herm, 1e-8, herm < 1e-8))
            row["hermiticity_deficit"] = herm
        if cert is not None:
            b = cv_bound(cert, h, E)
            row.update(bound=b, ratio=norm / b)
            res.checks.append(Check("quantize", "norm_within_bound", norm / b, 1.0, norm <= b))
        if cross is not None:
            B = matrix(cfg, cross)
            diff = float(np.max(np.abs(A.entries - B.entries)))
            row["cross_check_diff"] = diff
            if cross == "mc" or backend == "mc":
                mc_mat = B if cross == "mc" else A
                res.mc_samples += mc
                z = diff / max(mc_mat.meta["max_stderr"], 1e-300)
                res.checks.append(Check("quantize", f"cross_check_{cross}", z, 5.0, z < 5.0, "max deviation / stderr"))
            else:
                res.checks.append(Check("quantize", f"cross_check_{cross}", diff, tol, diff < tol))
        elif backend == "mc":
            res.mc_samples += mc
        res.rows.append(row)

    return run


def _plan_verify_bound(p: dict, where: str, seed: int | None) -> Callable:
    hs = [_h(h, where) for h in p.get("hs", [0.25, 1.0])]
    caps = {int(k): _positive_int(v, where, "cap") for k, v in p.get("caps", {"1": 16, "2": 12}).items()}
    if "symbols" in p:
        cases = []
        for i, spec in enumerate(p["symbols"]):
            F, cert = build_symbol(spec, f"{where}.symbols[{i}]")
            if cert is None:
                raise ConfigError(f"{where}.symbols[{i}]: verify-bound needs a certificate")
            cases.append(BatteryCase(spec.get("name", f"symbol{i}"), F, cert))
    elif p.get("battery", "default") == "default":
        cases = default_battery(seed or 0)
    else:
        raise ConfigError(f"{where}: unknown battery {p['battery']!r}")
    for c in cases:
        if c.symbol.n_modes not in caps:
            raise ConfigError(f"{where}: no cap given for {c.symbol.n_modes}-mode symbols")

    def run(res: ScenarioResult):
        rows = run_bound_battery(cases, hs, caps, log=res.log, strict=True)
        res.rows += rows
        worst = max((r["ratio"] for r in rows), default=0.0)
        n_viol = sum(r["violation"] for r in rows)
        res.checks.append(Check("verify-bound", "max_ratio", worst, 1.0, n_viol == 0, f"violations={n_viol}"))
        res.extra["cases"] = [{"symbol": r["symbol"], "quantity": r["quantity"], "h": r["h"], "norm": r["norm"],
                               "bound": r["bound"], "slack": r["bound"] - r["norm"]} for r in rows]

    return run


def _plan_convergence(p: dict, where: str, seed: int | None) -> Callable:
    n = _positive_int(p.get("n_modes", 4), where, "n_modes")
    h = _h(p.get("h", 1.0), where)
    cap = _positive_int(p.get("cap", 8), where, "cap")
    lam = float(p.get("lambda", 0.3))
    ratio = float(p.get("ratio", 0.5))

    def run(res: ScenarioResult):
        out = convergence_experiment(n, lam, h, cap, ratio, seed=seed or 0, log=res.log, strict=True)
        for r in out.rows:
            res.rows.append({"n": r["n"], "est_norm_diff": r["est_norm_diff"], "diff_bound": r["diff_bound"],
                             "ratio": r["ratio"]})
        res.checks.append(Check("convergence", "monotone", float(out.monotone), 1.0, out.monotone))
        worst = max(r["ratio"] for r in out.rows)
        res.checks.append(Check("convergence", "within_bound", worst, 1.0, out.within_bound))
        res.extra["fitted_C"] = out.fitted_C

    return run


def _checks_to_rows(res: ScenarioResult):
    for c in res.checks:
        res.rows.append({"case": c.suite, "quantity": c.name, "value": c.value, "threshold": c.threshold,
                         "passed": c.passed})


def _plan_selftest(p: dict, where: str, seed: int | None) -> Callable:
    suites = p.get("suites", ["bargmann"])
    bad = [s for s in suites if s not in SUITES or s == "measure"]
    if bad:
        raise ConfigError(f"{where}: unknown suites {bad}")

    def run(res: ScenarioResult):
        checks, _ = run_suites(tuple(suites))
        res.checks += checks
        _checks_to_rows(res)

    return run


def _plan_measure(p: dict, where: str, seed: int | None) -> Callable:
    if seed is None:
        raise ConfigError(f"{where}: Monte Carlo needs a seed")
    n = _positive_int(p.get("n_samples", 100_000), where, "n_samples")

    def run(res: ScenarioResult):
        res.checks += measure_suite(seed, n)
        res.mc_samples += 2 * n
        _checks_to_rows(res)

    return run


def _plan_constants(p: dict, where: str, seed: int | None) -> Callable:
    h = _h(p.get("h", 1.0), where)
    C = float(p.get("C", 25.0))

    def run(res: ScenarioResult):
        res.checks += constants_suite()
        rep = paper_constants_selftest(h, C)
        res.extra["schur_constant"] = rep.schur_constant
        res.extra["constants"] = rep.as_dict()
        _checks_to_rows(res)

    return run


PLANNERS = {
    "quantize": _plan_quantize,
    "verify-bound": _plan_verify_bound,
    "convergence": _plan_convergence,
    "bargmann-selftest": _plan_selftest,
    "measure-mc": _plan_measure,
    "constants-selftest": _plan_constants,
}


def load_config(path, seed_override: int | None = None) -> tuple[list[Plan], dict]:
    """Parse and validate a config file; raises ConfigError before any computation runs."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    scen = cfg.get("scenarios")
    if scen is None and "scenario" in cfg:
        scen = [cfg]
    if not isinstance(scen, list) or not scen:
        raise ConfigError("config needs a nonempty 'scenarios' list")
    seed = cfg.get("seed")
    if seed_override is not None:
        seed = seed_override
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int) or seed < 0):
        raise ConfigError("seed must be a nonnegative integer")
    plans, names = [], set()
    for i, p in enumerate(scen):
        where = f"scenarios[{i}]"
        if not isinstance(p, dict):
            raise ConfigError(f"{where}: expected an object")
        kind = _req(p, "scenario", where)
        if kind not in PLANNERS:
            raise ConfigError(f"{where}: unknown scenario {kind!r}; expected one of {', '.join(SCENARIOS)}")
        name = str(p.get("name", f"{kind}-{i}"))
        if name in names:
            raise ConfigError(f"{where}: duplicate scenario name {name!r}")
        names.add(name)
        plans.append(Plan(name, kind, PLANNERS[kind](p, where, seed)))
    meta = {"seed": seed, "output_dir": cfg.get("output_dir")}
    return plans, meta


# ---------------------------------------------------------------- output

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if not math.isfinite(v) else format(v, ".17g")
    return str(v)


def results_csv(results: list[ScenarioResult]) -> str:
    cols = ["scenario"]
    for r in results:
        for row in r.rows:
            cols += [k for k in row if k not in cols]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in results:
        for row in r.rows:
            w.writerow([r.name] + [_fmt(row.get(k)) for k in cols[1:]])
    return buf.getvalue()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def exit_code(results: list[ScenarioResult]) -> int:
    if any(r.status == "nonconvergence" for r in results):
        return EXIT_NONCONV
    if any(r.status == "fail" for r in results):
        return EXIT_FAIL
    return EXIT_OK


def summary_json(results: list[ScenarioResult], seed) -> dict:
    code = exit_code(results)
    return _plain({"schema_version": SCHEMA_VERSION, "seed": seed, "passed": code == EXIT_OK, "exit_code": code,
                   "scenarios": [r.as_dict() for r in results]})


def _table(header: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(header)]
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    return [line(header), line(["-" * w for w in widths])] + [line(r) for r in rows]


def report_render(summary: dict) -> str:
    """Fixed-layout text rendering of a summary; checks first, then per-case bound rows if present."""
    g = lambda v: "" if v is None else (f"{v:.6g}" if isinstance(v, float) else str(v))
    rows, cases = [], []
    for s in summary.get("scenarios", []):
        for c in s.get("checks", []):
            rows.append([s["name"], c["suite"], c["name"], g(c["value"]), g(c["threshold"]),
                         "pass" if c["passed"] else "FAIL"])
        if s.get("status") == "nonconvergence":
            rows.append([s["name"], s["scenario"], "convergence", "", "", "NONCONV"])
        for k in s.get("cases", []):
            cases.append([s["name"], k["symbol"], k["quantity"], g(k["h"]), g(k["norm"]), g(k["bound"]),
                          g(k["slack"])])
    out = _table(["scenario", "suite", "check", "value", "threshold", "status"], rows)
    if cases:
        out += [""] + _table(["scenario", "symbol", "quantity", "h", "norm", "bound", "slack"], cases)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- commands

def _thread_limit(n: int | None):
    if n is None:
        return contextlib.nullcontext()
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return contextlib.nullcontext()
    return threadpool_limits(limits=n)


def execute(plans: list[Plan]) -> list[ScenarioResult]:
    results = []
    for plan in plans:
        res = ScenarioResult(plan.name, plan.scenario)
        try:
            plan.run(res)
        except ArithmeticError as exc:
            res.error = f"{type(exc).__name__}: {exc}"
        results.append(res)
    return results


def write_outputs(out: Path, results: list[ScenarioResult], seed) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    summary = summary_json(results, seed)
    (out / "results.csv").write_text(results_csv(results))
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def cmd_run(args) -> int:
    try:
        plans, meta = load_config(args.config, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or os.environ.get(OUT_ENV) or meta["output_dir"] or "fockweyl_out")
    with _thread_limit(args.threads):
        results = execute(plans)
    summary = write_outputs(out, results, meta["seed"])
    sys.stdout.write(report_render(summary))
    return summary["exit_code"]


def cmd_selftest(args) -> int:
    with _thread_limit(args.threads):
        checks, _ = run_suites(("hermite", "constants", "bargmann"))
    res = ScenarioResult("selftest", "selftest", checks=checks)
    _checks_to_rows(res)
    results = [res]
    if args.out:
        summary = write_outputs(Path(args.out), results, None)
    else:
        summary = summary_json(results, None)
    sys.stdout.write(report_render(summary))
    return summary["exit_code"]


def cmd_report(args) -> int:
    try:
        summary = json.loads(Path(args.summary).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read summary: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(report_render(summary))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fockweyl", description="Quantization experiments on truncated Fock spaces")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the scenarios of a JSON config")
    r.add_argument("config")
    r.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and the config)")
    r.add_argument("--threads", type=int, help="cap on BLAS threads")
    r.add_argument("--seed", type=int, help="master seed (overrides the config)")
    r.set_defaults(func=cmd_run)
    s = sub.add_parser("selftest", help="hermite, constants and bargmann invariant suites")
    s.add_argument("--out", help="also write results.csv and summary.json here")
    s.add_argument("--threads", type=int)
    s.set_defaults(func=cmd_selftest)
    p = sub.add_parser("report", help="render a summary.json as a table")
    p.add_argument("summary")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
