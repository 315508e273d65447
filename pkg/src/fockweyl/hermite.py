"""Monic probabilists' Hermite polynomials, Gauss-Hermite rules and the scaled bases.

Conventions: ``H_n`` is monic and orthogonal for the standard normal law, with
``||H_n||^2 = n!``.  Configuration basis ``P_{alpha,h}(u) = prod H_{a_j}(u_j sqrt(2/h))``,
phase basis ``P_{alpha beta,h}(x, xi) = prod H_{a_j}(x_j/sqrt h) H_{b_j}(xi_j/sqrt h)``
and antiholomorphic basis ``Q_{alpha,h}(x, xi) = (2h)^{-|alpha|/2} prod (x_j - i xi_j)^{a_j}``.
Normalized versions carry ``c_alpha = (alpha!)^{-1/2}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.hermite import hermgauss

MAX_RULE_ORDER = 128


def hermite_eval(n: int, x):
    """Value of the monic probabilists' Hermite polynomial H_n at x (array-friendly)."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x, dtype=float) if not np.iscomplexobj(x) else np.asarray(x)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = x.copy()
    for k in range(1, n):
        prev, cur = cur, x * cur - k * prev
    return cur if cur.ndim else cur.item()


def hermite_table(nmax: int, x) -> np.ndarray:
    """Array of shape (nmax+1, *x.shape) holding H_0(x), ..., H_nmax(x)."""
    x = np.asarray(x)
    out = np.empty((nmax + 1,) + x.shape, dtype=np.result_type(x, float))
    out[0] = 1.0
    if nmax >= 1:
        out[1] = x
    for k in range(1, nmax):
        out[k + 1] = x * out[k] - k * out[k - 1]
    return out


def normalized_hermite_table(nmax: int, x) -> np.ndarray:
    """H_n(x)/sqrt(n!) for n <= nmax, via the stable normalized recurrence."""
    x = np.asarray(x)
    out = np.empty((nmax + 1,) + x.shape, dtype=np.result_type(x, float))
    out[0] = 1.0
    if nmax >= 1:
        out[1] = x
    for k in range(1, nmax):
        out[k + 1] = (x * out[k] - math.sqrt(k) * out[k - 1]) / math.sqrt(k + 1)
    return out


def hermite_norm_sq(n: int) -> float:
    """Squared L^2 norm of H_n under the standard normal law, n!."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if n > 170:
        raise OverflowError(f"{n}! overflows double precision; use log_hermite_norm_sq")
    return float(math.factorial(n))


def log_hermite_norm_sq(n: int) -> float:
    return math.lgamma(n + 1)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights for a one-dimensional Gaussian weight.

    weight_kind is "standard" (e^{-x^2}, total mass sqrt(pi)), "K" (normal law of
    variance h/2) or "phi" (normal law of variance h).
    """

    nodes: np.ndarray
    weights: np.ndarray
    weight_kind: str = "standard"
    h: float | None = None

    @property
    def order(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable) -> float:
        return np.sum(self.weights * f(self.nodes))


def gauss_hermite_rule(n: int) -> QuadratureRule:
    """n-point rule for the weight e^{-x^2}; exact for polynomials of degree <= 2n-1."""
    if n < 1:
        raise ValueError("rule order must be at least 1")
    if n > MAX_RULE_ORDER:
        raise ValueError(f"rule order {n} exceeds the supported maximum {MAX_RULE_ORDER}")
    x, w = hermgauss(n)
    if not (np.all(np.isfinite(x)) and np.all(w > 0)):
        raise ArithmeticError(f"Gauss-Hermite root finding failed at order {n}")
    return QuadratureRule(x, w, "standard")


def measure_rule(n: int, kind: str, h: float) -> QuadratureRule:
    """Rule for one coordinate of the configuration ("K") or phase ("phi") Gaussian measure."""
    if h <= 0:
        raise ValueError("h must be positive")
    base = gauss_hermite_rule(n)
    w = base.weights / math.sqrt(math.pi)
    if kind == "K":
        return QuadratureRule(math.sqrt(h) * base.nodes, w, "K", h)
    if kind == "phi":
        return QuadratureRule(math.sqrt(2 * h) * base.nodes, w, "phi", h)
    raise ValueError(f"unknown measure kind {kind!r}")


def tensor_grid(rule: QuadratureRule, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor product nodes (N^dim, dim) and weights (N^dim,)."""
    if dim == 0:
        return np.zeros((1, 0)), np.ones(1)
    mesh = np.meshgrid(*([rule.nodes] * dim), indexing="ij")
    wmesh = np.meshgrid(*([rule.weights] * dim), indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    weights = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
    return nodes, weights


@dataclass
class AdaptiveResult:
    value: object
    order: int
    converged: bool
    change: float


def adaptive_order(compute: Callable[[int], object], start: int = 16, max_order: int = MAX_RULE_ORDER,
                   rtol: float = 1e-10, atol: float = 1e-14) -> AdaptiveResult:
    """Double the quadrature order until successive results agree to rtol (relative, max-norm)."""
    order = start
    prev = np.asarray(compute(order))
    change = np.inf
    while order * 2 <= max_order:
        order *= 2
        cur = np.asarray(compute(order))
        change = float(np.max(np.abs(cur - prev))) if cur.size else 0.0
        scale = float(np.max(np.abs(cur))) if cur.size else 0.0
        if change <= rtol * scale + atol:
            return AdaptiveResult(cur, order, True, change)
        prev = cur
    return AdaptiveResult(prev, order, False, change)


@dataclass(frozen=True)
class BasisFunctionSpec:
    """A basis function P_K (alpha), P_phi (alpha, beta) or Q (alpha) at scale h."""

    alpha: tuple[int, ...]
    h: float
    kind: str = "Q"
    beta: tuple[int, ...] | None = None
    normalized: bool = False

    def __post_init__(self):
        if self.kind not in ("P_K", "P_phi", "Q"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if (self.kind == "P_phi") != (self.beta is not None):
            raise ValueError("beta is required exactly for kind P_phi")
        if self.h <= 0:
            raise ValueError("h must be positive")


def p_config(alpha: Sequence[int], u, h: float) -> np.ndarray:
    """P_{alpha,h}(u) for u of shape (..., n)."""
    u = np.asarray(u, dtype=float)
    out = np.ones(u.shape[:-1])
    s = math.sqrt(2.0 / h)
    for j, a in enumerate(alpha):
        if a:
            out = out * hermite_eval(a, u[..., j] * s)
    return out


def p_phase(alpha: Sequence[int], beta: Sequence[int], x, xi, h: float) -> np.ndarray:
    """P_{alpha beta,h}(x, xi) for x, xi of shape (..., n)."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    out = np.ones(x.shape[:-1])
    s = 1.0 / math.sqrt(h)
    for j, (a, b) in enumerate(zip(alpha, beta)):
        if a:
            out = out * hermite_eval(a, x[..., j] * s)
        if b:
            out = out * hermite_eval(b, xi[..., j] * s)
    return out


def q_basis(alpha: Sequence[int], x, xi, h: float) -> np.ndarray:
    """Q_{alpha,h}(x, xi) = (2h)^{-|alpha|/2} prod (x_j - i xi_j)^{alpha_j}."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    w = (x - 1j * xi) / math.sqrt(2 * h)
    out = np.ones(x.shape[:-1], dtype=complex)
    for j, a in enumerate(alpha):
        if a:
            out = out * w[..., j] ** a
    return out


def c_alpha(alpha: Sequence[int]) -> float:
    return 1.0 / math.sqrt(math.prod(math.factorial(int(a)) for a in alpha))


def basis_eval(spec: BasisFunctionSpec, point) -> complex:
    """Evaluate a basis function at a configuration point u or a phase point (x, xi)."""
    n = len(spec.alpha)
    if spec.kind == "P_K":
        u = np.asarray(point, dtype=float).reshape(-1)
        if u.size != n:
            raise ValueError("point dimension does not match the multi-index")
        val = complex(p_config(spec.alpha, u, spec.h))
        norm = c_alpha(spec.alpha)
    else:
        x, xi = point
        x = np.asarray(x, dtype=float).reshape(-1)
        xi = np.asarray(xi, dtype=float).reshape(-1)
        if x.size != n or xi.size != n:
            raise ValueError("point dimension does not match the multi-index")
        if spec.kind == "Q":
            val = complex(q_basis(spec.alpha, x, xi, spec.h))
            norm = c_alpha(spec.alpha)
        else:
            val = complex(p_phase(spec.alpha, spec.beta, x, xi, spec.h))
            norm = c_alpha(spec.alpha) * c_alpha(spec.beta)
    return val * norm if spec.normalized else val


def q_table(nmax: int, x, xi, h: float) -> np.ndarray:
    """Single-mode normalized values c_n Q_{n,h}(x, xi), shape (nmax+1, *x.shape)."""
    w = (np.asarray(x, dtype=float) - 1j * np.asarray(xi, dtype=float)) / math.sqrt(2 * h)
    out = np.empty((nmax + 1,) + w.shape, dtype=complex)
    out[0] = 1.0
    for k in range(nmax):
        out[k + 1] = out[k] * w / math.sqrt(k + 1)
    return out


def p_config_table(nmax: int, u, h: float) -> np.ndarray:
    """Single-mode normalized values c_n P_{n,h}(u), shape (nmax+1, *u.shape)."""
    return normalized_hermite_table(nmax, np.asarray(u, dtype=float) * math.sqrt(2.0 / h))


def hermite_binomial_check(m: int, points) -> float:
    """Max residual of (x - i xi)^m = sum_p C(m,p) (-i)^{m-p} H_p(x) H_{m-p}(xi)."""
    if m > 12:
        raise ValueError("binomial check is limited to m <= 12")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x, xi = pts[:, 0], pts[:, 1]
    lhs = (x - 1j * xi) ** m
    hx = hermite_table(m, x)
    hxi = hermite_table(m, xi)
    rhs = np.zeros_like(lhs)
    for p in range(m + 1):
        rhs = rhs + math.comb(m, p) * (-1j) ** (m - p) * hx[p] * hxi[m - p]
    return float(np.max(np.abs(lhs - rhs)))
