"""Segal-Bargmann transform, reproducing kernel, Kree-Raczka integral, shift identity, frame norm."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core_index import ModeSet, Truncation
from .fock import FockVector, PhasePoint
from .hermite import adaptive_order, measure_rule, normalized_hermite_table, tensor_grid

MAX_QUAD_MODES = 2


def phase_grid(n_modes: int, h: float, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tensor Gauss-Hermite grid for mu^Phi over n modes: x, xi of shape (N, n) and weights."""
    if n_modes > MAX_QUAD_MODES:
        raise ValueError(f"tensor phase quadrature is limited to {MAX_QUAD_MODES} modes")
    nodes, w = tensor_grid(measure_rule(order, "phi", h), 2 * n_modes)
    return nodes[:, :n_modes], nodes[:, n_modes:], w


def config_grid(n_modes: int, h: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    if n_modes > MAX_QUAD_MODES:
        raise ValueError(f"tensor configuration quadrature is limited to {MAX_QUAD_MODES} modes")
    return tensor_grid(measure_rule(order, "K", h), n_modes)


def _w(x, xi, h):
    return (np.asarray(x, dtype=float) - 1j * np.asarray(xi, dtype=float)) / math.sqrt(2 * h)


def q_values(t: Truncation, x, xi, h: float) -> np.ndarray:
    """c_alpha Q_{alpha,h}(X) for every alpha in t and every point; shape (dim, npts)."""
    x = np.atleast_2d(x)
    xi = np.atleast_2d(xi)
    w = _w(x, xi, h)
    alpha = t.array
    out = np.ones((t.dim, x.shape[0]), dtype=complex)
    for k in range(len(t.modes)):
        tab = np.empty((t.per_mode_cap + 1, x.shape[0]), dtype=complex)
        tab[0] = 1.0
        for n in range(t.per_mode_cap):
            tab[n + 1] = tab[n] * w[:, k] / math.sqrt(n + 1)
        out *= tab[alpha[:, k]]
    return out


def p_values(t: Truncation, u, h: float) -> np.ndarray:
    """c_alpha P_{alpha,h}(u) for every alpha in t; shape (dim, npts)."""
    u = np.atleast_2d(u)
    alpha = t.array
    out = np.ones((t.dim, u.shape[0]))
    for k in range(len(t.modes)):
        tab = normalized_hermite_table(t.per_mode_cap, u[:, k] * math.sqrt(2.0 / h))
        out *= tab[alpha[:, k]]
    return out


@dataclass
class SBFunction:
    """Element of the Segal-Bargmann space stored as coefficients over c_alpha Q_{alpha,h}."""

    truncation: Truncation
    coeffs: np.ndarray
    h: float

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.truncation.dim,):
            raise ValueError("coefficient vector does not match the truncation size")

    @classmethod
    def basis(cls, t: Truncation, alpha, h: float) -> "SBFunction":
        c = np.zeros(t.dim, dtype=complex)
        c[t.index(alpha)] = 1.0
        return cls(t, c, h)

    @property
    def n_modes(self) -> int:
        return len(self.truncation.modes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __call__(self, x, xi) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim <= 1
        x = x.reshape(-1, self.n_modes)
        xi = np.asarray(xi, dtype=float).reshape(-1, self.n_modes)
        vals = self.coeffs @ q_values(self.truncation, x, xi, self.h)
        return vals[0] if single else vals


def bargmann_transform(f, h: float) -> SBFunction:
    """theta_{E,h}: coefficients over c_alpha P_{alpha,h} become coefficients over c_alpha Q_{alpha,h}."""
    if isinstance(f, FockVector):
        if f.space != "config":
            raise ValueError("expected a configuration vector")
        return SBFunction(f.truncation, f.coeffs.copy(), h)
    t, coeffs = f
    return SBFunction(t, np.asarray(coeffs, dtype=complex).copy(), h)


def _as_points(X, n_modes: int) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(X, PhasePoint):
        return X.x.reshape(1, -1), X.xi.reshape(1, -1)
    x, xi = X
    return np.asarray(x, dtype=float).reshape(-1, n_modes), np.asarray(xi, dtype=float).reshape(-1, n_modes)


@dataclass
class QuadValue:
    value: np.ndarray
    order: int
    converged: bool


def _adaptive(compute: Callable[[int], np.ndarray], start: int, max_order: int, rtol: float) -> QuadValue:
    res = adaptive_order(compute, start=start, max_order=max_order, rtol=rtol)
    return QuadValue(res.value, res.order, res.converged)


def reproducing_eval(F: SBFunction, X, route: str = "basis", start_order: int = 16, max_order: int = 128,
                     rtol: float = 1e-12) -> np.ndarray | complex:
    """rho_X(F) by direct basis evaluation, by the kernel integral, or by its shifted form."""
    n = F.n_modes
    x, xi = _as_points(X, n)
    if route == "basis":
        vals = F(x, xi)
    elif route in ("kernel", "shifted"):
        zbar = x - 1j * xi  # (npts, n)

        def compute(order):
            gx, gxi, w = phase_grid(n, F.h, order)
            if route == "kernel":
                # exp((1/2h) l_{x - i xi}(y + i eta)) F(Y)
                ker = np.exp((zbar @ (gx + 1j * gxi).T) / (2 * F.h))
                return ker @ (w * F(gx, gxi))
            # exp(-(1/2h) l_{x + i xi}(y - i eta)) F(X + Y)
            ker = np.exp(-(np.conj(zbar) @ (gx - 1j * gxi).T) / (2 * F.h))
            shifted = np.array([F(gx + x[p], gxi + xi[p]) for p in range(len(x))])
            return np.sum(ker * shifted * w, axis=1)

        vals = _adaptive(compute, start_order, max_order, rtol).value
    else:
        raise ValueError(f"unknown route {route!r}")
    vals = np.asarray(vals)
    return complex(vals.reshape(-1)[0]) if isinstance(X, PhasePoint) else vals


def kree_raczka_transform(f, X, h: float, start_order: int = 16, max_order: int = 128,
                          rtol: float = 1e-12) -> np.ndarray | complex:
    """int f(u) exp((1/h) l_{x - i xi}(u) - (1/4h)(x - i xi)^2) dmu^K(u) by quadrature.

    f is a configuration FockVector (coefficients over c_alpha P_{alpha,h}) or a callable on
    configuration points of shape (npts, n) together with an explicit mode count via
    ``(callable, n_modes)``.
    """
    if isinstance(f, FockVector):
        t = f.truncation
        n = len(t.modes)

        def fval(u):
            return f.coeffs @ p_values(t, u, h)
    else:
        fval, n = f
    if n > MAX_QUAD_MODES:
        raise ValueError("Kree-Raczka quadrature is limited to 2 modes")
    x, xi = _as_points(X, n)
    zbar = x - 1j * xi
    sq = np.sum(zbar ** 2, axis=1)

    def compute(order):
        u, w = config_grid(n, h, order)
        ker = np.exp((zbar @ u.T) / h - sq[:, None] / (4 * h))
        return ker @ (w * fval(u))

    res = _adaptive(compute, start_order, max_order, rtol)
    if not res.converged:
        raise ArithmeticError("Kree-Raczka quadrature did not converge")
    vals = np.asarray(res.value)
    return complex(vals.reshape(-1)[0]) if isinstance(X, PhasePoint) else vals


def shift_identity_residual(F: SBFunction, G: SBFunction, a, b, h: float | None = None,
                            order: int = 64) -> float:
    """|LHS - RHS| for int e^{-(1/2h) l_{a-ib}(x+i xi)} F(x+a, xi+b) conj G dmu^Phi = int F conj G dmu^Phi."""
    h = F.h if h is None else h
    n = F.n_modes
    a = np.asarray(a, dtype=float).reshape(n)
    b = np.asarray(b, dtype=float).reshape(n)

    def both(o):
        x, xi, w = phase_grid(n, h, o)
        ker = np.exp(-((x + 1j * xi) @ (a - 1j * b)) / (2 * h))
        lhs = np.sum(w * ker * F(x + a, xi + b) * np.conj(G(x, xi)))
        rhs = np.sum(w * F(x, xi) * np.conj(G(x, xi)))
        return np.array([lhs, rhs])

    res = adaptive_order(both, start=order // 2 if order >= 32 else 16, rtol=1e-13)
    lhs, rhs = res.value
    return float(abs(lhs - rhs))


def split_indices(t: Truncation, E: ModeSet):
    """Unique E-parts and complement parts of the truncation's indices, with the joint map."""
    pe = t.modes.positions(E)
    pc = t.modes.positions(t.modes.difference(E))
    arr = t.array
    e_parts = sorted({tuple(r) for r in arr[:, pe]}, key=lambda s: (sum(s), tuple(-v for v in s)))
    c_parts = sorted({tuple(r) for r in arr[:, pc]}, key=lambda s: (sum(s), tuple(-v for v in s)))
    e_lookup = {s: k for k, s in enumerate(e_parts)}
    c_lookup = {s: k for k, s in enumerate(c_parts)}
    rows = np.array([e_lookup[tuple(r)] for r in arr[:, pe]], dtype=int)
    cols = np.array([c_lookup[tuple(r)] for r in arr[:, pc]], dtype=int)
    return np.array(e_parts, dtype=int).reshape(len(e_parts), len(pe)), \
        np.array(c_parts, dtype=int).reshape(len(c_parts), len(pc)), rows, cols


def coherent_polynomials(parts: np.ndarray, x, xi, h: float, cap: int) -> np.ndarray:
    """conj-free polynomial part z^alpha/sqrt(alpha!) of coherent coefficients; (npts, nparts)."""
    x = np.atleast_2d(x)
    xi = np.atleast_2d(xi)
    out = np.ones((x.shape[0], parts.shape[0]), dtype=complex)
    for k in range(parts.shape[1]):
        z = (x[:, k] + 1j * xi[:, k]) / math.sqrt(2 * h)
        tab = np.empty((cap + 1, x.shape[0]), dtype=complex)
        tab[0] = 1.0
        for m in range(cap):
            tab[m + 1] = tab[m] * z / math.sqrt(m + 1)
        out *= tab[parts[:, k]].T
    return out


@dataclass
class FrameNormResult:
    value: float
    order: int
    converged: bool


def frame_norm(f: FockVector, E: ModeSet, h: float, start_order: int = 8, max_order: int = 64,
               rtol: float = 1e-12) -> FrameNormResult:
    """N_E(f) from (2 pi h)^{-|E|} int ||i*_{X_E} f||^2 dX_E by tensor quadrature over X_E.

    The Gaussian factor of |<e_alpha, phi_X>|^2 is e^{-|X|^2/(2h)}, so the integral is a
    mu^Phi expectation of a polynomial in X_E.
    """
    t = f.truncation
    if not E.issubset(t.modes):
        raise ValueError("E must be contained in the truncation's modes")
    if len(E) == 0:
        return FrameNormResult(f.norm(), 0, True)
    e_parts, c_parts, rows, cols = split_indices(t, E)
    M = np.zeros((len(e_parts), len(c_parts)), dtype=complex)
    M[rows, cols] = f.coeffs

    def compute(order):
        x, xi, w = phase_grid(len(E), h, order)
        C = coherent_polynomials(e_parts, x, xi, h, t.per_mode_cap)
        A = np.conj(C) @ M  # (npts, n_c): coefficients of i*_X f without the Gaussian
        return np.sum(w * np.sum(np.abs(A) ** 2, axis=1))

    res = adaptive_order(compute, start=start_order, max_order=max_order, rtol=rtol)
    return FrameNormResult(float(math.sqrt(max(float(np.real(res.value)), 0.0))), res.order, res.converged)
