"""Bound-verification battery and the nested-window convergence experiment.

Norms are largest singular values on the truncation (lower bounds of the true norms), so
``ratio = norm / bound > 1`` is a genuine violation while small ratios are only slack.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import SymbolClassCert, cv_bound, diff_bound, operator_norm_lower
from .core_index import ModeSet, Truncation
from .quantize import QuantizationConfig, Symbol, hybrid_matrix, weyl_matrix
from .symbols import cosine_symbol, example15_family, lattice_gaussian, random_trig


@dataclass
class BatteryCase:
    name: str
    symbol: Symbol
    cert: SymbolClassCert


def default_battery(seed: int = 0) -> list[BatteryCase]:
    """Trig, lattice-Gaussian (lam 0 and 0.3) and mean-field symbols on 1 and 2 modes."""
    rng = np.random.default_rng(seed)
    m1, m2 = ModeSet((0,)), ModeSet((0, 1))
    cases = []
    F, c = cosine_symbol(m1, 0.8, 0.5)
    cases.append(BatteryCase("trig_cos_1mode", F, c))
    F, c = random_trig(m2, 2, rng, scale=1.0)
    cases.append(BatteryCase("trig_random_2mode", F, c))
    for lam in (0.0, 0.3):
        L = lattice_gaussian(1, [0, 1], [1.0, 0.5], lam)
        cases.append(BatteryCase(f"lattice_gauss_lam{lam}", L.symbol, L.suggested_cert(2)))
    fam, _ = example15_family([1, 2], order=2)
    for e in fam:
        cases.append(BatteryCase(f"example15_N{e.size}", e.symbol, e.cert))
    return cases


def _cap_for(n_modes: int, cap: int) -> Truncation:
    return Truncation(ModeSet.range(n_modes), cap, cap)


def _row(case, h, cap, quantity, norm, bound):
    return {"symbol": case if isinstance(case, str) else case.name, "h": h, "cap": cap, "quantity": quantity,
            "norm": norm, "bound": bound, "ratio": norm / bound, "violation": bool(norm > bound)}


def run_bound_battery(cases: list[BatteryCase], hs=(0.25, 1.0), caps: dict | None = None,
                      log: dict | None = None, strict: bool = False) -> list[dict]:
    """Rows comparing estimated norms with the product bounds for Weyl, hybrid and differences.

    ``log`` collects quadrature orders and calibration records across all cases.
    """
    caps = caps or {1: 16, 2: 12}
    log = {} if log is None else log
    rows = []
    for case in cases:
        F = case.symbol
        n = F.n_modes
        t = _cap_for(n, caps[n])
        for h in hs:
            cfg = QuantizationConfig(h, t, strict=strict, log=log)
            W = weyl_matrix(F, cfg)
            rows.append(_row(case, h, caps[n], "weyl", operator_norm_lower(W), cv_bound(case.cert, h)))
            hyb = {}
            for Lam in F.modes.subsets():
                A = W if Lam == F.modes else hybrid_matrix(F, Lam, cfg)
                hyb[Lam.ids] = A
                rows.append(_row(case, h, caps[n], f"hybrid{list(Lam.ids)}", operator_norm_lower(A),
                                 cv_bound(case.cert, h, Lam)))
            for Lam in F.modes.subsets():
                for Lp in F.modes.subsets():
                    if Lam.ids == Lp.ids or not set(Lam.ids).issubset(Lp.ids):
                        continue
                    d = operator_norm_lower(hyb[Lp.ids] - hyb[Lam.ids])
                    rows.append(_row(case, h, caps[n], f"diff{list(Lam.ids)}->{list(Lp.ids)}", d,
                                     diff_bound(case.cert, Lam, Lp, h)))
    return rows


@dataclass
class ConvergenceResult:
    rows: list
    monotone: bool
    within_bound: bool
    cert: SymbolClassCert
    fitted_C: float

    @property
    def passed(self) -> bool:
        return self.monotone and self.within_bound


def convergence_experiment(n_modes: int = 4, lam: float = 0.3, h: float = 1.0, cap: int = 8,
                           ratio: float = 0.5, seed: int = 0, log: dict | None = None,
                           strict: bool = False) -> ConvergenceResult:
    """||Op^{hyb,Lam_{n+1}} - Op^{hyb,Lam_n}|| for Lam_n = first n modes of a geometric lattice Gaussian."""
    L = lattice_gaussian(1, list(range(n_modes)), [ratio ** j for j in range(n_modes)], lam)
    cert = L.suggested_cert(2, seed=seed)
    F = L.symbol
    t = Truncation(F.modes, cap, cap)
    cfg = QuantizationConfig(h, t, strict=strict, log={} if log is None else log)
    mats = []
    for n in range(n_modes + 1):
        Lam = ModeSet(tuple(range(n)))
        mats.append(hybrid_matrix(F, Lam, cfg, "reduced"))
    rows = []
    for n in range(n_modes):
        Lam, Lp = ModeSet(tuple(range(n))), ModeSet(tuple(range(n + 1)))
        est = operator_norm_lower(mats[n + 1] - mats[n])
        b = diff_bound(cert, Lam, Lp, h)
        rows.append({"n": n, "est_norm_diff": est, "diff_bound": b, "ratio": est / b, "h": h, "cap": cap,
                     "dim": t.dim})
    est = [r["est_norm_diff"] for r in rows]
    mono = all(b < a for a, b in zip(est, est[1:]))
    within = all(r["ratio"] <= 1 for r in rows)
    return ConvergenceResult(rows, mono, within, cert, L.fitted[2])
