"""Anti-Wick and hybrid quantization.

Anti-Wick matrices are <Op e_n, e_m> = int F c_n Q_n conj(c_m Q_m) dmu^Phi.  The hybrid
quantization is Weyl on E and anti-Wick on the rest; the reduced route uses the identity
Op^{E}(F) = Op^weyl(heat smoothing of F over the modes outside E).
"""

from __future__ import annotations

import math

import numpy as np

from ..bargmann import q_values
from ..core_index import ModeSet, Truncation
from ..fock import OperatorMatrix
from ..gaussmeasure import GaussianMeasureSpec, RngStream
from ..hermite import gauss_hermite_rule, tensor_grid
from .symbol import Symbol, TrigSymbol, heat_smooth
from .weyl import (MAX_QUAD_MODES, QuantizationConfig, _assemble, _check_modes, _run_adaptive,
                   _wigner_mode_kernel, frame_weyl_matrix, old_weyl_matrix, weyl_matrix,
                   wigner_weyl_matrix)

MAX_DIRECT_MODES = 3


def _aw_mode_kernel(order: int, h: float, cap: int):
    t, w = tensor_grid(gauss_hermite_rule(order), 2)
    x = math.sqrt(2 * h) * t[:, 0]
    xi = math.sqrt(2 * h) * t[:, 1]
    w = w / math.pi
    z = (x - 1j * xi) / math.sqrt(2 * h)
    pw = np.empty((len(z), cap + 1), dtype=complex)
    pw[:, 0] = 1.0
    for k in range(cap):
        pw[:, k + 1] = pw[:, k] * z / math.sqrt(k + 1)
    # K[q, m, n] = w_q conj(q_m) q_n
    K = w[:, None, None] * np.conj(pw)[:, :, None] * pw[:, None, :]
    return (x, xi), K


def _aw_quadrature(F: Symbol, cfg: QuantizationConfig) -> OperatorMatrix:
    t = cfg.truncation
    n = len(t.modes)
    if n > MAX_QUAD_MODES:
        raise ValueError("anti-Wick quadrature is limited to 2 modes")
    cap = t.per_mode_cap

    def compute(order):
        parts = [_aw_mode_kernel(order, cfg.h, cap) for _ in range(n)]
        return _assemble(F, [p[0] for p in parts], [p[1] for p in parts], t)

    A, order = _run_adaptive(compute, cfg, "anti_wick")
    return OperatorMatrix(t, A, meta={"backend": "quadrature", "order": order})


def _aw_monte_carlo(F: Symbol, cfg: QuantizationConfig, batch: int = 20_000) -> OperatorMatrix:
    t = cfg.truncation
    n = len(t.modes)
    spec = GaussianMeasureSpec(t.modes, cfg.h, "phi")
    rng = RngStream(cfg.seed, 7)
    N = int(cfg.mc_samples)
    S1 = np.zeros((t.dim, t.dim), dtype=complex)
    S2 = np.zeros((t.dim, t.dim))
    done = 0
    gen = rng.generator()
    while done < N:
        b = min(batch, N - done)
        pts = gen.normal(scale=math.sqrt(spec.variance), size=(b, 2 * n))
        x, xi = pts[:, :n], pts[:, n:]
        f = F.evaluate(x, xi)
        if not np.all(np.isfinite(f)):
            raise ArithmeticError("symbol produced a non-finite value on a sample")
        qv = q_values(t, x, xi, cfg.h)  # (dim, b)
        S1 += (np.conj(qv) * f) @ qv.T
        a2 = np.abs(qv) ** 2
        S2 += (a2 * np.abs(f) ** 2) @ a2.T
        done += b
    mean = S1 / N
    var = np.maximum(S2 / N - np.abs(mean) ** 2, 0.0)
    stderr = np.sqrt(var / N)
    return OperatorMatrix(t, mean, meta={"backend": "mc", "samples": N, "stderr": stderr,
                                         "max_stderr": float(stderr.max()), "seed": cfg.seed})


def anti_wick_matrix(F: Symbol, cfg: QuantizationConfig, backend: str | None = None) -> OperatorMatrix:
    """Matrix of Op_h^AW(F): quadrature on <= 2 modes, else Weyl of the heat-smoothed symbol."""
    _check_modes(F, cfg.truncation)
    n = F.n_modes
    if backend is None:
        backend = "quadrature" if n <= MAX_QUAD_MODES and F.kind != "gauss_quad" else "heat"
    if backend == "quadrature":
        return _aw_quadrature(F, cfg)
    if backend == "mc":
        return _aw_monte_carlo(F, cfg)
    if backend == "heat":
        out = weyl_matrix(heat_smooth(F, F.modes, cfg.h), cfg)
        out.meta["route"] = "heat"
        return out
    raise ValueError(f"unknown anti-Wick backend {backend!r}")


def _single_mode_atom(modes: ModeSet, j: int, p: float, q: float) -> TrigSymbol:
    return TrigSymbol(ModeSet((modes.ids[j],)), [[p]], [[q]], [1.0])


def _direct_hybrid(F: TrigSymbol, E: ModeSet, cfg: QuantizationConfig, weyl_factor: str = "wigner") -> OperatorMatrix:
    """Per-atom, per-mode factorization: single-mode Weyl on modes in E, anti-Wick quadrature elsewhere.

    ``weyl_factor`` is "wigner" (phase-space quadrature) or "frame" (the double coherent
    resolution, whose quadrature is capped at order 48 and reaches about 1e-7 at moderate caps).
    """
    t = cfg.truncation
    n = len(t.modes)
    if n > MAX_DIRECT_MODES:
        raise ValueError(f"the direct hybrid route is limited to {MAX_DIRECT_MODES} modes")
    cap = t.per_mode_cap
    t1 = {}
    arr = t.array
    A = np.zeros((t.dim, t.dim), dtype=complex)
    for p, q, c in zip(F.y, F.eta, F.c):
        term = np.full((t.dim, t.dim), c, dtype=complex)
        for j, mode in enumerate(t.modes.ids):
            atom = _single_mode_atom(t.modes, j, p[j], q[j])
            key = atom.modes
            if key not in t1:
                t1[key] = Truncation(key, cap, cap)
            sub = cfg.with_truncation(t1[key])
            if mode in E.ids:
                M = (frame_weyl_matrix(atom, sub) if weyl_factor == "frame" else wigner_weyl_matrix(atom, sub)).entries
            else:
                M = _aw_quadrature(atom, sub).entries
            term *= M[np.ix_(arr[:, j], arr[:, j])]
        A += term
    return OperatorMatrix(t, A, meta={"route": "direct" if weyl_factor == "wigner" else "direct_frame"})


def _kernel_hybrid(F: Symbol, E: ModeSet, cfg: QuantizationConfig) -> OperatorMatrix:
    """Tensor quadrature with cross-Wigner kernels on E and Husimi kernels elsewhere (<= 2 modes)."""
    t = cfg.truncation
    n = len(t.modes)
    if n > MAX_QUAD_MODES:
        raise ValueError("the kernel hybrid route is limited to 2 modes")
    cap = t.per_mode_cap

    def compute(order):
        parts = [_wigner_mode_kernel(order, cfg.h, cap) if j in E.ids else _aw_mode_kernel(order, cfg.h, cap)
                 for j in t.modes.ids]
        return _assemble(F, [p[0] for p in parts], [p[1] for p in parts], t)

    A, order = _run_adaptive(compute, cfg, "hybrid_kernel")
    return OperatorMatrix(t, A, meta={"route": "kernel", "order": order})


def hybrid_atom_sum(atoms, E: ModeSet, cfg: QuantizationConfig) -> OperatorMatrix:
    """Hybrid operator of a discrete measure: each atom's unitary is damped by its weight off E.

    ``atoms`` is a TrigSymbol or (y, eta, c) triples over the truncation modes.  The weight
    exp(-(h/4)(|y|^2 + |eta|^2)) restricted to the modes outside E multiplies c explicitly.
    """
    modes = cfg.truncation.modes
    if isinstance(atoms, TrigSymbol):
        ys, etas, cs = atoms.y, atoms.eta, atoms.c
        modes = atoms.modes
    else:
        atoms = list(atoms)
        ys = np.array([np.atleast_1d(a[0]) for a in atoms], dtype=float)
        etas = np.array([np.atleast_1d(a[1]) for a in atoms], dtype=float)
        cs = np.array([a[2] for a in atoms], dtype=complex)
    if not E.issubset(modes):
        raise ValueError("E must be a subset of the atom modes")
    off = [j for j, m in enumerate(modes.ids) if m not in E.ids]
    damped = []
    for y, eta, c in zip(ys, etas, cs):
        w = math.exp(-(cfg.h / 4) * (sum(y[j] ** 2 for j in off) + sum(eta[j] ** 2 for j in off)))
        damped.append((y, eta, c * w))
    out = old_weyl_matrix(damped, cfg)
    out.meta["route"] = "atom_sum"
    return out


def default_hybrid_route(F: Symbol) -> str:
    return "kernel" if F.kind == "closed_form" and F.n_modes <= MAX_QUAD_MODES else "reduced"


def hybrid_matrix(F: Symbol, E: ModeSet, cfg: QuantizationConfig, route: str | None = None) -> OperatorMatrix:
    """Matrix of Op_h^{E}(F): Weyl in the modes of E, anti-Wick in the other modes of F.

    Routes: "reduced" quantizes the symbol heat-smoothed off E in Weyl form, "direct"
    factorizes trig symbols per atom and mode ("direct_frame" does the same with the double
    coherent resolution for the Weyl factors), "kernel" mixes per-mode quadrature kernels.
    """
    _check_modes(F, cfg.truncation)
    if not E.issubset(F.modes):
        raise ValueError("E must be a subset of the symbol's modes")
    route = route or default_hybrid_route(F)
    if route == "kernel":
        return _kernel_hybrid(F, E, cfg)
    if route == "reduced":
        rest = F.modes.difference(E)
        G = heat_smooth(F, rest, cfg.h) if len(rest) else F
        out = weyl_matrix(G, cfg)
        out.meta["route"] = "reduced"
        return out
    if route in ("direct", "direct_frame"):
        if F.kind != "trig":
            raise ValueError("the direct hybrid route supports trig symbols only")
        return _direct_hybrid(F, E, cfg, "wigner" if route == "direct" else "frame")
    raise ValueError(f"unknown hybrid route {route!r}")
