"""Built-in invariant suites: Hermite bases, constants, Bargmann identities, covariance, measures.

Each suite returns a list of Check records; the CLI turns them into CSV rows and a JSON
summary, and the test-suite asserts on them.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import bargmann as bg
from .bounds import paper_constants_selftest
from .core_index import ModeSet, Truncation
from .fock import (FockVector, bargmann_functor_map, segal_iso_eval, weyl_translation_matrix)
from .gaussmeasure import (GaussianMeasureSpec, RngStream, WeightSequence, cameron_martin_divergence_probe,
                           ell_a, exp_ell, mc_integrate, tail_summability_report)
from .hermite import hermite_binomial_check, measure_rule, tensor_grid


@dataclass
class Check:
    suite: str
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _below(suite, name, value, tol, detail="") -> Check:
    value = float(value)
    return Check(suite, name, value, tol, bool(value < tol), detail)


# ---------------------------------------------------------------- hermite

def gram_deviation(n_modes: int, h: float, max_degree: int, kind: str, order: int = 24) -> float:
    """max |Gram - I| of {c_a P_a} under mu^K or {c_a Q_a} under mu^Phi."""
    t = Truncation(ModeSet.range(n_modes), max_degree, max_degree)
    if kind == "K":
        u, w = tensor_grid(measure_rule(order, "K", h), n_modes)
        V = bg.p_values(t, u, h)
    else:
        x, xi, w = bg.phase_grid(n_modes, h, order)
        V = bg.q_values(t, x, xi, h)
    G = (V * w) @ V.conj().T
    return float(np.max(np.abs(G - np.eye(t.dim))))


def hermite_suite() -> list[Check]:
    out = []
    for n in (1, 2):
        for h in (0.5, 1.0):
            for kind in ("K", "phi"):
                out.append(_below("hermite", f"gram_{kind}_modes{n}_h{h}", gram_deviation(n, h, 6, kind), 1e-8))
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(100, 2))
    for m in range(1, 7):
        out.append(_below("hermite", f"binomial_m{m}", hermite_binomial_check(m, pts), 1e-9))
    return out


# ---------------------------------------------------------------- constants

def constants_suite() -> list[Check]:
    rep = paper_constants_selftest()
    out = [_below("constants", "schur_constant", abs(rep.schur_constant - math.sqrt(math.pi / 2)), 1e-10,
                  f"value={rep.schur_constant!r}")]
    for k, v in rep.p_integrals.items():
        out.append(Check("constants", f"p{k}_integral", v, math.sqrt(rep.C), v <= math.sqrt(rep.C),
                         "C = 25 requires the integral to be at most 5"))
    return out


# ---------------------------------------------------------------- bargmann

def transform_residual(alpha: tuple[int, ...], h: float, X) -> float:
    """|T(c_a P_a)(X) - c_a Q_a(X)| with T evaluated by quadrature."""
    n = len(alpha)
    t = Truncation(ModeSet.range(n), max(alpha), sum(alpha))
    f = FockVector.basis(t, alpha)
    lhs = bg.kree_raczka_transform(f, X, h)
    rhs = bg.SBFunction.basis(t, alpha, h)(*X)
    return float(np.max(np.abs(lhs - rhs)))


def bargmann_suite(seed: int = 5) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    h = 1.0
    x = rng.uniform(-1, 1, (10, 1))
    xi = rng.uniform(-1, 1, (10, 1))
    worst = max(transform_residual((a,), hh, (x, xi)) for a in range(6) for hh in (0.5, 1.0))
    out.append(_below("bargmann", "transform_P_to_Q", worst, 1e-7))
    # reproducing property by three routes
    t = Truncation(ModeSet.range(1), 4, 4)
    F = bg.SBFunction(t, rng.normal(size=t.dim) + 1j * rng.normal(size=t.dim), h)
    X = (rng.uniform(-1, 1, (6, 1)), rng.uniform(-1, 1, (6, 1)))
    r = [bg.reproducing_eval(F, X, route) for route in ("basis", "kernel", "shifted")]
    diff = max(np.max(np.abs(r[0] - r[1])), np.max(np.abs(r[0] - r[2])), np.max(np.abs(r[1] - r[2])))
    out.append(_below("bargmann", "reproducing_routes", diff, 1e-6))
    # Kree-Raczka integral against rho_X of the transform
    f = FockVector(t, rng.normal(size=t.dim))
    kr = bg.kree_raczka_transform(f, X, h)
    out.append(_below("bargmann", "kree_raczka", np.max(np.abs(kr - bg.bargmann_transform(f, h)(*X))), 1e-6))
    # shift identity
    G = bg.SBFunction(t, rng.normal(size=t.dim) + 1j * rng.normal(size=t.dim), h)
    res = max(bg.shift_identity_residual(F, G, rng.uniform(-0.5, 0.5, 1), rng.uniform(-0.5, 0.5, 1), hh)
              for hh in (0.5, 1.0) for _ in range(3))
    out.append(_below("bargmann", "shift_identity", res, 1e-7))
    # frame norm on two modes with E one of them
    t2 = Truncation(ModeSet.range(2), 3, 3)
    v = FockVector(t2, rng.normal(size=t2.dim) + 1j * rng.normal(size=t2.dim))
    worst = 0.0
    for E in (ModeSet((0,)), ModeSet((1,)), ModeSet((0, 1))):
        fn = bg.frame_norm(v, E, h)
        worst = max(worst, abs(fn.value - v.norm()) / v.norm())
    out.append(_below("bargmann", "frame_norm", worst, 1e-5))
    return out


# ---------------------------------------------------------------- covariance

def config_covariance_residual(f: FockVector, a, b, h: float, u: np.ndarray, pad: int = 10) -> float:
    """Pointwise residual of J^K(e^{i Phi_S(a+ib)} f)(u) against the translated closed form."""
    t = f.truncation
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    U = weyl_translation_matrix(a + 1j * b, t, pad)
    g = FockVector(t, U.entries @ f.coeffs)
    lhs = segal_iso_eval(g, h, "K", u)
    pref = np.exp(-0.5 * b @ b + 0.5j * (a @ b) + 1j * (u @ (a + 1j * b)) / math.sqrt(h))
    rhs = pref * segal_iso_eval(f, h, "K", u + math.sqrt(h) * b)
    return float(np.max(np.abs(lhs - rhs)))


def phase_covariance_residual(f: FockVector, y, eta, h: float, x: np.ndarray, xi: np.ndarray, pad: int = 10) -> float:
    """Pointwise residual of J^Phi W e^{(i/sqrt h) Phi_S(iY)} f against the shifted closed form."""
    t = f.truncation
    y = np.atleast_1d(np.asarray(y, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    Y = y + 1j * eta
    U = weyl_translation_matrix(1j * Y / math.sqrt(h), t, pad)
    g = FockVector(t, U.entries @ f.coeffs)
    lhs = segal_iso_eval(bargmann_functor_map(g), h, "phi", (x, xi))
    pref = np.exp(-(np.sum(np.abs(Y) ** 2)) / (4 * h) - ((x - 1j * xi) @ Y) / (2 * h))
    rhs = pref * segal_iso_eval(bargmann_functor_map(f), h, "phi", (x + y, xi + eta))
    return float(np.max(np.abs(lhs - rhs)))


def translation_product_residual(X: complex, Y: complex, cap: int = 20, pad: int = 10,
                                 work_pad: int | None = None) -> float:
    """max |U(X)U(Y) - e^{(i/2) Im(X conj Y)} U(X+Y)| on the cap block.

    Each U uses the exponential pad `pad`; the product is formed on a workspace enlarged by
    `work_pad` (default: cap) so the intermediate sum is not cut at the comparison cap.
    """
    t = Truncation(ModeSet.range(1), cap, cap)
    tp = t.padded(cap if work_pad is None else work_pad)
    UX = weyl_translation_matrix(np.array([X]), tp, pad).entries
    UY = weyl_translation_matrix(np.array([Y]), tp, pad).entries
    UXY = weyl_translation_matrix(np.array([X + Y]), tp, pad).entries
    pos = tp.embed_positions(t)
    lhs = (UX @ UY)[np.ix_(pos, pos)]
    rhs = np.exp(0.5j * np.imag(X * np.conj(Y))) * UXY[np.ix_(pos, pos)]
    return float(np.max(np.abs(lhs - rhs)))


def covariance_suite(seed: int = 7, n_points: int = 25, n_shifts: int = 5) -> list[Check]:
    rng = np.random.default_rng(seed)
    t = Truncation(ModeSet.range(1), 20, 20)
    basis = [FockVector.basis(t, (k,)) for k in range(3)]
    worst_k, worst_p = 0.0, 0.0
    for h in (0.5, 1.0):
        for _ in range(n_shifts):
            r, th = rng.uniform(0, 1), rng.uniform(0, 2 * math.pi)
            a, b = r * math.cos(th), r * math.sin(th)
            u = rng.uniform(-1.5, 1.5, (n_points, 1))
            x = rng.uniform(-1.5, 1.5, (n_points, 1))
            xi = rng.uniform(-1.5, 1.5, (n_points, 1))
            for f in basis:
                worst_k = max(worst_k, config_covariance_residual(f, a, b, h, u))
                worst_p = max(worst_p, phase_covariance_residual(f, a, b, h, x, xi))
    out = [_below("covariance", "config_covariance", worst_k, 1e-6),
           _below("covariance", "phase_covariance", worst_p, 1e-6)]
    worst = 0.0
    for _ in range(5):
        X = rng.uniform(0, 1) * np.exp(2j * math.pi * rng.uniform())
        Y = rng.uniform(0, 1) * np.exp(2j * math.pi * rng.uniform())
        worst = max(worst, translation_product_residual(X, Y))
    out.append(_below("covariance", "translation_product_law", worst, 1e-6))
    return out


# ---------------------------------------------------------------- measures

def measure_suite(seed: int = 0, n_samples: int = 100_000) -> list[Check]:
    out = []
    h = 1.0
    modes = ModeSet.range(3)
    spec = GaussianMeasureSpec(modes, h, "K")
    a = np.array([0.4 + 0.3j, -0.5 + 0.1j, 0.2 - 0.6j])
    base = RngStream(seed, 1)
    est = mc_integrate(lambda u: np.abs(ell_a(a, u)) ** 2, spec, base.child(0), n_samples)
    exact = h / 2 * float(np.sum(np.abs(a) ** 2))
    out.append(Check("measure", "ell_norm_sq", abs(est.mean - exact) / est.stderr, 3.0,
                     est.within(exact, 3.0), f"mc={est.mean:.6g} exact={exact:.6g} stderr={est.stderr:.3g}"))
    a2 = np.array([0.3 + 0.2j, -0.2 + 0.5j, 0.1 - 0.1j])
    est = mc_integrate(lambda u: np.abs(exp_ell(a2, u)) ** 2, spec, base.child(1), n_samples)
    exact = math.exp(h * float(np.sum(np.real(a2) ** 2)))
    out.append(Check("measure", "exp_ell_norm_sq", abs(est.mean - exact) / est.stderr, 3.0,
                     est.within(exact, 3.0), f"mc={est.mean:.6g} exact={exact:.6g} stderr={est.stderr:.3g}"))
    for k in (10, 25):
        probe = cameron_martin_divergence_probe(h, [k, 4 * k], base.child(10 + k), 10_000)
        fac = probe.medians[1] / probe.medians[0]
        out.append(Check("measure", f"divergence_factor_{k}", fac, 5.0, 3.0 <= fac <= 5.0, "expected in [3, 5]"))
    w = WeightSequence.power_law(1.0, 50)
    rep = tail_summability_report(w, 1.0, 50)
    ratio = float(np.max(2 / math.sqrt(2 * math.pi) * rep.terms / rep.bound))
    ok = rep.verdict == "summable" and rep.bound_respected
    out.append(Check("measure", "power_law_summability", ratio, 1.0, ok, f"verdict={rep.verdict}"))
    return out


SUITES = {
    "hermite": hermite_suite,
    "constants": constants_suite,
    "bargmann": bargmann_suite,
    "covariance": covariance_suite,
    "measure": measure_suite,
}


def run_suites(names=("hermite", "constants", "bargmann")) -> tuple[list[Check], dict]:
    checks, timings = [], {}
    for name in names:
        t0 = time.perf_counter()
        checks += SUITES[name]()
        timings[name] = time.perf_counter() - t0
    return checks, timings
