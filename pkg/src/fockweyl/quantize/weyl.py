"""Weyl quantization on truncated Fock spaces.

Backends:
  translation  trig symbols; sum of c_k exp(i s sqrt(h) Phi_S(y_k + i eta_k)) on padded truncations
  gaussian     Gaussian sums; exact matrix from the Bargmann kernel <Op e^{w a*} Omega, e^{z a*} Omega>
  wigner       any symbol on <= 2 modes; tensor Gauss-Hermite against cross-Wigner kernels
  frame        1 mode; double coherent-state resolution with <Op Psi_X, Psi_Y> as the kernel
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from ..core_index import ModeSet, Truncation
from ..fock import OperatorMatrix, coherent_coefficients, translation_with_escalation
from ..hermite import MAX_RULE_ORDER, adaptive_order, gauss_hermite_rule, tensor_grid
from .symbol import ClosedFormSymbol, GaussSymbol, Symbol, TrigSymbol

MAX_QUAD_MODES = 2


class NonConvergence(ArithmeticError):
    """Quadrature order, pad or iteration budget exhausted."""


@dataclass
class QuantizationConfig:
    """Shared numerical settings for the quantizers."""

    h: float
    truncation: Truncation
    order: int | None = None  # fixed quadrature order; None means adaptive doubling
    start_order: int = 16
    max_order: int = 64
    rtol: float = 1e-10
    pad: int | None = None
    pad_tol: float = 1e-12
    mc_samples: int = 100_000
    seed: int = 0
    strict: bool = False  # raise NonConvergence instead of recording it
    log: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0 < self.h <= 1):
            raise ValueError(f"h must lie in (0, 1], got {self.h}")

    def with_truncation(self, t: Truncation) -> "QuantizationConfig":
        return QuantizationConfig(self.h, t, self.order, self.start_order, self.max_order, self.rtol,
                                  self.pad, self.pad_tol, self.mc_samples, self.seed, self.strict, self.log)


def _check_modes(F: Symbol, t: Truncation):
    if F.modes != t.modes:
        raise ValueError(f"symbol modes {F.modes.ids} differ from truncation modes {t.modes.ids}")


def _run_adaptive(compute, cfg: QuantizationConfig, what: str, max_order: int | None = None):
    if cfg.order is not None:
        return compute(cfg.order), cfg.order
    top = min(max_order or cfg.max_order, MAX_RULE_ORDER)
    res = adaptive_order(compute, start=cfg.start_order, max_order=top, rtol=cfg.rtol)
    cfg.log.setdefault("quadrature_orders", []).append({"what": what, "order": res.order,
                                                        "converged": res.converged})
    if not res.converged and cfg.strict:
        raise NonConvergence(f"{what}: quadrature did not converge by order {res.order}")
    return res.value, res.order


# ---------------------------------------------------------------- coherent matrix elements

def _pairs(X, Y, n):
    def split(P):
        if hasattr(P, "xi"):
            return P.x.reshape(1, n), P.xi.reshape(1, n)
        x, xi = P
        return np.asarray(x, dtype=float).reshape(-1, n), np.asarray(xi, dtype=float).reshape(-1, n)
    return split(X) + split(Y)


def trig_coherent_kernel(F: TrigSymbol, x, xi, y, eta, h: float) -> np.ndarray:
    """<Op(F) Psi_X, Psi_Y> for trig symbols, per atom in closed form; arrays of pairs (P, n)."""
    out = np.zeros(len(x), dtype=complex)
    Mx, Mxi = (x + y) / 2, (xi + eta) / 2
    base = 1j * np.sum(x * eta - y * xi, axis=1) / (2 * h)
    for p, q, c in zip(F.y, F.eta, F.c):
        k1 = (xi - eta) / h - p
        k2 = -(x - y) / h - q
        expo = np.sum(1j * (Mx * k1 + Mxi * k2) - h * (k1 ** 2 + k2 ** 2) / 4, axis=1)
        out += c * np.exp(expo + base)
    return out


def gauss_coherent_kernel(F: GaussSymbol, x, xi, y, eta, h: float) -> np.ndarray:
    """<Op(F) Psi_X, Psi_Y> for Gaussian sums, closed form of the Gaussian integral."""
    n = F.n_modes
    X = np.concatenate([x, xi], axis=1)
    Y = np.concatenate([y, eta], axis=1)
    Om = _omega(n)
    b = (X + Y) / h + 1j * ((X - Y) @ Om.T) / h
    M2 = np.sum((X + Y) ** 2, axis=1) / (4 * h)
    sympl = 1j * np.einsum("pi,ij,pj->p", X, Om, Y) / (2 * h)
    out = np.zeros(len(x), dtype=complex)
    for c, A in F.terms:
        P = A + np.eye(2 * n) / h
        Pinv = np.linalg.inv(P)
        pref = np.linalg.det(np.eye(2 * n) + h * A) ** -0.5
        quad = 0.25 * np.einsum("pi,ij,pj->p", b, Pinv, b)
        out += c * pref * np.exp(quad - M2 + sympl)
    return out


def quadrature_coherent_kernel(F: Symbol, x, xi, y, eta, h: float, order: int) -> np.ndarray:
    """Gauss-Hermite in the Gaussian factor centred at (X+Y)/2."""
    n = F.n_modes
    if n > MAX_QUAD_MODES:
        raise ValueError("quadrature coherent elements are limited to 2 modes")
    t, w = tensor_grid(gauss_hermite_rule(order), 2 * n)
    w = w / math.pi ** n
    out = np.empty(len(x), dtype=complex)
    for p in range(len(x)):
        Mx = (x[p] + y[p]) / 2
        Mxi = (xi[p] + eta[p]) / 2
        z = Mx + math.sqrt(h) * t[:, :n]
        zeta = Mxi + math.sqrt(h) * t[:, n:]
        phi = z @ (xi[p] - eta[p]) - zeta @ (x[p] - y[p]) + 0.5 * (x[p] @ eta[p] - y[p] @ xi[p])
        out[p] = np.sum(w * F.evaluate(z, zeta) * np.exp(1j * phi / h))
    return out


def weyl_coherent_element(F: Symbol, X, Y, cfg: QuantizationConfig | float, order: int | None = None):
    """<Op^weyl(F) Psi_X, Psi_Y>; X, Y are PhasePoints or (x, xi) arrays of pairs."""
    h = cfg.h if isinstance(cfg, QuantizationConfig) else float(cfg)
    n = F.n_modes
    x, xi, y, eta = _pairs(X, Y, n)
    if F.kind == "trig":
        vals = trig_coherent_kernel(F, x, xi, y, eta, h)
    elif F.kind == "gauss_quad":
        vals = gauss_coherent_kernel(F, x, xi, y, eta, h)
    else:
        if order is not None:
            vals = quadrature_coherent_kernel(F, x, xi, y, eta, h, order)
        else:
            res = adaptive_order(lambda o: quadrature_coherent_kernel(F, x, xi, y, eta, h, o),
                                 start=16, max_order=128, rtol=1e-10)
            if not res.converged:
                raise NonConvergence("coherent element quadrature did not converge")
            vals = res.value
    single = hasattr(X, "xi") and hasattr(Y, "xi")
    return complex(vals[0]) if single else vals


def _omega(n: int) -> np.ndarray:
    Om = np.zeros((2 * n, 2 * n))
    Om[:n, n:] = np.eye(n)
    Om[n:, :n] = -np.eye(n)
    return Om


# ---------------------------------------------------------------- sign calibration

@dataclass(frozen=True)
class CalibrationRecord:
    h: float
    sign: int
    residual_chosen: float
    residual_other: float
    probe_atom: tuple
    probe_point: tuple

    def as_dict(self) -> dict:
        return {"h": self.h, "sign": self.sign, "residual_chosen": self.residual_chosen,
                "residual_other": self.residual_other, "probe_atom": list(self.probe_atom),
                "probe_point": list(self.probe_point)}


@lru_cache(maxsize=64)
def calibrate_translation_sign(h: float) -> CalibrationRecord:
    """Choose s in exp(i s sqrt(h) Phi_S(y + i eta)) so that the vacuum column reproduces the
    closed-form coherent element of the atom exp(-i(y x + eta xi))."""
    modes = ModeSet((0,))
    t = Truncation(modes, 24, 24)
    yk, ek = 0.37, -0.52
    atom = TrigSymbol(modes, [[yk]], [[ek]], [1.0])
    Yp = (np.array([[0.3]]), np.array([[-0.2]]))
    exact = trig_coherent_kernel(atom, np.zeros((1, 1)), np.zeros((1, 1)), Yp[0], Yp[1], h)[0]
    phiY = coherent_coefficients(Yp[0], Yp[1], h, t)[0]
    res = {}
    for s in (+1, -1):
        U = translation_with_escalation(np.array([s * math.sqrt(h) * (yk + 1j * ek)]), t, pad=12,
                                        deficit_tol=1e-14, columns=1)
        res[s] = abs(np.vdot(phiY, U.entries[:, 0]) - exact)
    s = min(res, key=res.get)
    return CalibrationRecord(h, s, float(res[s]), float(res[-s]), (yk, ek), (0.3, -0.2))


def calibration_log(cfg: QuantizationConfig) -> CalibrationRecord:
    rec = calibrate_translation_sign(float(cfg.h))
    cfg.log.setdefault("calibration", {})[repr(float(cfg.h))] = rec.as_dict()
    return rec


# ---------------------------------------------------------------- translation backend

def _translation_sum(F: TrigSymbol, cfg: QuantizationConfig) -> OperatorMatrix:
    t = cfg.truncation
    s = calibration_log(cfg).sign
    A = np.zeros((t.dim, t.dim), dtype=complex)
    deficit = 0.0
    pads = []
    for p, q, c in zip(F.y, F.eta, F.c):
        if np.all(p == 0) and np.all(q == 0):
            A += c * np.eye(t.dim)
            continue
        U = translation_with_escalation(s * math.sqrt(cfg.h) * (p + 1j * q), t, pad=cfg.pad,
                                        deficit_tol=cfg.pad_tol)
        deficit = max(deficit, U.meta["deficit"])
        pads.append(U.meta["pad"])
        A += c * U.entries
    return OperatorMatrix(t, A, meta={"backend": "translation", "deficit": deficit,
                                      "pads": pads, "sign": s})


def old_weyl_matrix(atoms, cfg: QuantizationConfig) -> OperatorMatrix:
    """sum_k c_k exp(-i sqrt(h) Phi_S(y_k + i eta_k)) for a discrete measure of atoms.

    ``atoms`` is a TrigSymbol or an iterable of (y, eta, c) with y, eta vectors over the modes.
    """
    if isinstance(atoms, TrigSymbol):
        F = atoms
    else:
        atoms = list(atoms)
        F = TrigSymbol(cfg.truncation.modes, [a[0] for a in atoms], [a[1] for a in atoms],
                       [a[2] for a in atoms])
    _check_modes(F, cfg.truncation)
    out = _translation_sum(F, cfg)
    out.meta["backend"] = "old_weyl"
    out.meta["atom_mass"] = float(np.sum(np.abs(F.c)))
    return out


# ---------------------------------------------------------------- gaussian backend

def _bargmann_form(A: np.ndarray, h: float, n: int) -> tuple[complex, np.ndarray]:
    """Constant C and matrix R with <Op e^{w a*}Omega, e^{z a*}Omega> = C exp(v^T R v / 2), v = (zbar, w)."""
    I2 = np.eye(2 * n)
    Om = _omega(n)
    P = A + I2 / h
    Pinv = np.linalg.inv(P)
    L = np.hstack([(I2 + 1j * Om) / h, (I2 - 1j * Om) / h])
    Q = 0.25 * L.T @ Pinv @ L
    Q -= np.block([[I2, I2], [I2, I2]]) / (4 * h)
    Q += 1j * np.block([[np.zeros_like(Om), Om], [Om.T, np.zeros_like(Om)]]) / (4 * h)
    Q += np.eye(4 * n) / (4 * h)
    In = np.eye(n)
    Tc = math.sqrt(h / 2) * np.block([[In, In], [-1j * In, 1j * In]])
    T = np.block([[Tc, np.zeros_like(Tc)], [np.zeros_like(Tc), Tc]])
    S = T.T @ Q @ T  # variables (w, wbar, z, zbar)
    sel_bad = np.r_[n:2 * n, 2 * n:3 * n]
    if np.max(np.abs(S[np.ix_(sel_bad, sel_bad)])) > 1e-9 * max(1.0, np.abs(S).max()):
        raise ArithmeticError("Bargmann kernel is not sesquiholomorphic; inconsistent conventions")
    sel = np.r_[3 * n:4 * n, 0:n]  # (zbar, w)
    R = 2 * S[np.ix_(sel, sel)]
    C = np.linalg.det(np.eye(2 * n) + h * A) ** -0.5
    return complex(C), R


def _gaussian_recurrence(R: np.ndarray, t: Truncation) -> np.ndarray:
    """Normalized Taylor coefficients g[m, n] of exp(v^T R v / 2), v = (zbar, w)."""
    n = len(t.modes)
    arr = t.array
    dim = t.dim
    down = [t.shift_map(j, -1) for j in range(n)]
    G = np.zeros((dim, dim), dtype=complex)
    G[0, 0] = 1.0
    Rzz = R[:n, :n]
    Rwz = R[n:, :n]
    Rww = R[n:, n:]
    # first column: recurrence in the zbar variables only
    for mi in range(1, dim):
        m = arr[mi]
        i = int(np.nonzero(m)[0][0])
        acc = 0.0
        for j in range(n):
            mm = m.copy()
            mm[i] -= 1
            if mm[j] - 0 <= 0:
                continue
            fac = math.sqrt(mm[j])
            mm[j] -= 1
            acc += Rzz[i, j] * fac * G[t.index(mm), 0]
        G[mi, 0] = acc / math.sqrt(m[i])
    sq = np.sqrt(arr.astype(float))
    for ni in range(1, dim):
        nv = arr[ni]
        i = int(np.nonzero(nv)[0][0])
        nm = nv.copy()
        nm[i] -= 1
        prev = t.index(nm)
        col = np.zeros(dim, dtype=complex)
        for j in range(n):
            if Rwz[i, j] != 0:
                src = down[j]
                ok = src >= 0
                col[ok] += Rwz[i, j] * sq[ok, j] * G[src[ok], prev]
            if Rww[i, j] != 0 and nm[j] > 0:
                n2 = nm.copy()
                fac = math.sqrt(n2[j])
                n2[j] -= 1
                col += Rww[i, j] * fac * G[:, t.index(n2)]
        G[:, ni] = col / math.sqrt(nv[i])
    return G


def gaussian_weyl_matrix(F: GaussSymbol, cfg: QuantizationConfig) -> OperatorMatrix:
    t = cfg.truncation
    n = len(t.modes)
    A = np.zeros((t.dim, t.dim), dtype=complex)
    for c, Aq in F.terms:
        C, R = _bargmann_form(Aq, cfg.h, n)
        A += c * C * _gaussian_recurrence(R, t)
    return OperatorMatrix(t, A, meta={"backend": "gaussian"})


# ---------------------------------------------------------------- quadrature kernels over modes

def _assemble(F: Symbol, nodes: list[tuple[np.ndarray, np.ndarray]], kernels: list[np.ndarray],
              t: Truncation, block: int = 256) -> np.ndarray:
    """A[I, J] = sum_q F(X_q) prod_j K_j[q_j, m_j(I), n_j(J)] over a tensor grid of modes."""
    n = len(t.modes)
    arr = t.array
    if n == 1:
        x1, xi1 = nodes[0]
        g = F.evaluate(x1[:, None], xi1[:, None])
        full = np.tensordot(g, kernels[0], axes=(0, 0))
        return full[np.ix_(arr[:, 0], arr[:, 0])]
    if n != 2:
        raise ValueError("tensor quadrature assembly is limited to 2 modes")
    (x1, xi1), (x2, xi2) = nodes
    K1, K2 = kernels
    c1 = K1.shape[1]
    c2 = K2.shape[1]
    Q1, Q2 = len(x1), len(x2)
    K2r = K2.reshape(Q2, c2 * c2)
    acc = np.zeros((c1 * c1, c2 * c2), dtype=complex)
    for s in range(0, Q1, block):
        b = slice(s, min(s + block, Q1))
        nb = b.stop - b.start
        x = np.stack([np.repeat(x1[b], Q2), np.tile(x2, nb)], axis=1)
        xi = np.stack([np.repeat(xi1[b], Q2), np.tile(xi2, nb)], axis=1)
        g = F.evaluate(x, xi).reshape(nb, Q2)
        T = g @ K2r
        acc += K1[b].reshape(nb, c1 * c1).T @ T
    acc = acc.reshape(c1, c1, c2, c2)
    m1, m2 = arr[:, 0], arr[:, 1]
    return acc[m1[:, None], m1[None, :], m2[:, None], m2[None, :]]


def cahill_table(beta: np.ndarray, cap: int) -> np.ndarray:
    """e^{|beta|^2/2} <e_m, D(beta) e_n> for m, n <= cap; shape (len(beta), cap+1, cap+1)."""
    beta = np.asarray(beta, dtype=complex)
    r2 = np.abs(beta) ** 2
    out = np.empty((len(beta), cap + 1, cap + 1), dtype=complex)
    for m in range(cap + 1):
        for n in range(cap + 1):
            if m >= n:
                pre = np.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
                out[:, m, n] = pre * beta ** (m - n) * eval_genlaguerre(n, m - n, r2)
            else:
                pre = np.exp(0.5 * (gammaln(m + 1) - gammaln(n + 1)))
                out[:, m, n] = pre * (-np.conj(beta)) ** (n - m) * eval_genlaguerre(m, n - m, r2)
    return out


def _wigner_mode_kernel(order: int, h: float, cap: int):
    t, w = tensor_grid(gauss_hermite_rule(order), 2)
    z = math.sqrt(h) * t[:, 0]
    zeta = math.sqrt(h) * t[:, 1]
    beta = math.sqrt(2.0) * (t[:, 0] + 1j * t[:, 1])
    parity = (-1.0) ** np.arange(cap + 1)
    K = cahill_table(beta, cap) * parity[None, None, :] * (w / math.pi)[:, None, None]
    return (z, zeta), K


def wigner_weyl_matrix(F: Symbol, cfg: QuantizationConfig) -> OperatorMatrix:
    t = cfg.truncation
    n = len(t.modes)
    if n > MAX_QUAD_MODES:
        raise ValueError("the wigner backend is limited to 2 modes")
    cap = t.per_mode_cap

    def compute(order):
        parts = [_wigner_mode_kernel(order, cfg.h, cap) for _ in range(n)]
        return _assemble(F, [p[0] for p in parts], [p[1] for p in parts], t)

    A, order = _run_adaptive(compute, cfg, "wigner", max_order=cfg.max_order if n == 2 else MAX_RULE_ORDER)
    return OperatorMatrix(t, A, meta={"backend": "wigner", "order": order})


# ---------------------------------------------------------------- frame backend

def frame_weyl_matrix(F: Symbol, cfg: QuantizationConfig) -> OperatorMatrix:
    """(2 pi h)^{-2} double coherent resolution with kernel <Op Psi_X, Psi_Y> (1 mode)."""
    t = cfg.truncation
    if len(t.modes) != 1:
        raise ValueError("the frame backend is limited to 1 mode")
    cap = t.per_mode_cap
    arr = t.array[:, 0]
    h = cfg.h
    inner_order = 24

    def compute(order):
        tt, w = tensor_grid(gauss_hermite_rule(order), 2)
        X = 2 * math.sqrt(h) * tt  # weight e^{-|X|^2/(4h)} absorbed by the rule
        z = X[:, 0] + 1j * X[:, 1]
        z = z / math.sqrt(2 * h)
        pw = np.empty((len(z), cap + 1), dtype=complex)
        pw[:, 0] = 1.0
        for k in range(cap):
            pw[:, k + 1] = pw[:, k] * z / math.sqrt(k + 1)
        P = len(z)
        xs = np.repeat(X[:, 0], P)
        xis = np.repeat(X[:, 1], P)
        ys = np.tile(X[:, 0], P)
        etas = np.tile(X[:, 1], P)
        # kernel K[t, s] = <Op Psi_{X_t}, Psi_{Y_s}>
        if F.kind == "trig":
            K = trig_coherent_kernel(F, xs[:, None], xis[:, None], ys[:, None], etas[:, None], h)
        elif F.kind == "gauss_quad":
            K = gauss_coherent_kernel(F, xs[:, None], xis[:, None], ys[:, None], etas[:, None], h)
        else:
            K = quadrature_coherent_kernel(F, xs[:, None], xis[:, None], ys[:, None], etas[:, None], h,
                                           inner_order)
        K = K.reshape(P, P)
        left = (pw * w[:, None])  # rows Y: z_s^m / sqrt(m!)
        right = np.conj(pw) * w[:, None]  # columns X: conj(z_t^n) / sqrt(n!)
        full = (4 / math.pi ** 2) * left.T @ K.T @ right
        return full[np.ix_(arr, arr)]

    A, order = _run_adaptive(compute, cfg, "frame", max_order=48)
    return OperatorMatrix(t, A, meta={"backend": "frame", "order": order})


# ---------------------------------------------------------------- dispatch

def default_backend(F: Symbol) -> str:
    return {"trig": "translation", "gauss_quad": "gaussian"}.get(F.kind, "wigner")


def weyl_matrix(F: Symbol, cfg: QuantizationConfig, backend: str | None = None) -> OperatorMatrix:
    """Matrix of Op_h^weyl(F) on cfg.truncation."""
    _check_modes(F, cfg.truncation)
    backend = backend or default_backend(F)
    if backend == "translation":
        if F.kind != "trig":
            raise ValueError("the translation backend needs a trig symbol")
        out = _translation_sum(F, cfg)
    elif backend == "gaussian":
        if F.kind != "gauss_quad":
            raise ValueError("the gaussian backend needs a gauss_quad symbol")
        out = gaussian_weyl_matrix(F, cfg)
    elif backend == "wigner":
        out = wigner_weyl_matrix(F, cfg)
    elif backend == "frame":
        out = frame_weyl_matrix(F, cfg)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return out
