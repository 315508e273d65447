"""Symbol-class certificates, the product-form norm bounds, kernel decay and norm estimation.

Every comparison here is one-sided: truncated matrices can only underestimate operator
norms, so a computed norm above an analytic bound is a genuine violation, while slack
may partly come from truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy import integrate

from .core_index import ModeSet, index_families
from .fock import OperatorMatrix
from .gaussmeasure import RngStream
from .jets import variables
from .quantize.symbol import ClosedFormSymbol, Symbol, TrigSymbol, telescoping_apply
from .quantize.weyl import NonConvergence, weyl_coherent_element

CV = 225 * math.pi  # constant of the product bounds
KERNEL_CONST = 450.0
P_POLYS = {0: lambda x: 3 - 4 * x ** 2, 1: lambda x: 4 * x, 2: lambda x: -np.ones_like(x)}
CONST_C = 25.0


@dataclass(frozen=True)
class SymbolClassCert:
    """Claimed membership of a symbol in H_m(M, eps)."""

    M: float
    eps: Mapping[int, float]
    order: int = 2

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be positive")
        if self.order not in (2, 4):
            raise ValueError("order must be 2 or 4")
        if any(e < 0 for e in self.eps.values()):
            raise ValueError("eps must be nonnegative")
        object.__setattr__(self, "eps", dict(self.eps))

    @classmethod
    def uniform(cls, modes: ModeSet, M: float, eps: float, order: int = 2) -> "SymbolClassCert":
        return cls(M, {j: float(eps) for j in modes.ids}, order)

    @property
    def modes(self) -> ModeSet:
        return ModeSet(tuple(self.eps))

    @property
    def K(self) -> float:
        """K_2 = sup max(1, eps^3) for order 2, K_4 = sup max(1, eps^6) for order 4."""
        power = 3 if self.order == 2 else 6
        return max([1.0] + [e ** power for e in self.eps.values()])

    def eps_of(self, modes: ModeSet | Iterable[int]) -> np.ndarray:
        ids = modes.ids if isinstance(modes, ModeSet) else tuple(modes)
        return np.array([self.eps[j] for j in ids], dtype=float)

    def with_order(self, order: int) -> "SymbolClassCert":
        return SymbolClassCert(self.M, self.eps, order)

    def as_dict(self) -> dict:
        return {"M": self.M, "eps": {str(k): v for k, v in self.eps.items()}, "order": self.order, "K": self.K}


@dataclass(frozen=True)
class RhoDeltaCert:
    """Derivative bounds M prod rho_j^alpha_j delta_j^beta_j over I_4, separating x and xi."""

    M: float
    rho: Mapping[int, float]
    delta: Mapping[int, float]

    @property
    def K(self) -> float:
        return max([1.0] + [(self.rho[j] * self.delta[j]) ** 3 for j in self.rho])


def _check_h(h: float):
    if not (0 < h <= 1):
        raise ValueError(f"h must lie in (0, 1], got {h}")


def _scope(cert, scope) -> tuple[int, ...]:
    if scope is None:
        return tuple(cert.eps) if hasattr(cert, "eps") else tuple(cert.rho)
    return scope.ids if isinstance(scope, ModeSet) else tuple(scope)


def _factor(cert: SymbolClassCert, h: float, order: int) -> tuple[float, float]:
    """(scale, power) with the per-mode factor 1 + scale * eps^power."""
    K = cert.with_order(order).K
    if order == 2:
        return CV * K * math.sqrt(h), 1
    return CV * K * h, 2


def cv_bound(cert: SymbolClassCert | RhoDeltaCert, h: float, scope=None, order: int | None = None) -> float:
    """M prod_{j in scope} (1 + 225 pi K sqrt(h) eps_j), or the h eps^2 form at order 4."""
    _check_h(h)
    ids = _scope(cert, scope)
    if isinstance(cert, RhoDeltaCert):
        return cert.M * math.prod(1 + CV * cert.K * h * cert.rho[j] * cert.delta[j] for j in ids)
    order = cert.order if order is None else order
    s, p = _factor(cert, h, order)
    return cert.M * math.prod(1 + s * cert.eps[j] ** p for j in ids)


def diff_bound(cert: SymbolClassCert, Lam, Lam_prime, h: float, order: int | None = None) -> float:
    """Bound on ||Op^{hyb,Lam'}(F) - Op^{hyb,Lam}(F)|| for Lam inside Lam'."""
    _check_h(h)
    lam = set(_scope(cert, Lam))
    lamp = _scope(cert, Lam_prime)
    if not lam.issubset(lamp):
        raise ValueError("Lam must be a subset of Lam'")
    order = cert.order if order is None else order
    s, p = _factor(cert, h, order)
    new = sum(cert.eps[j] ** p for j in lamp if j not in lam)
    return cert.M * s * new * math.prod(1 + s * cert.eps[j] ** p for j in lamp)


def telescoped_term_bound(cert: SymbolClassCert, E, h: float, order: int | None = None) -> float:
    """Bound on ||Op^{hyb,E}(T_h(E) F)||: M (225 pi K sqrt h)^{|E|} prod_E eps_j (or the h eps^2 form)."""
    _check_h(h)
    ids = _scope(cert, E)
    order = cert.order if order is None else order
    s, p = _factor(cert, h, order)
    return cert.M * math.prod(s * cert.eps[j] ** p for j in ids)


# ---------------------------------------------------------------- certification

@dataclass
class CertReport:
    max_ratio: float
    worst: tuple | None
    n_checked: int
    order: int
    tolerance: float = 1e-6
    note: str = "sampled derivative ratios; advisory, not a proof"

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1 + self.tolerance


def sample_points(n_modes: int, n_points: int = 200, spread: float = 2.0, seed: int = 0):
    """Normal points with scale `spread`, plus the origin."""
    g = RngStream(seed, 11).generator()
    pts = spread * g.standard_normal((n_points, 2 * n_modes))
    pts[0] = 0.0
    return pts[:, :n_modes], pts[:, n_modes:]


def _derivative_table(F: Symbol, pairs, x, xi, order: int, max_coeffs: int = 2_000_000) -> dict:
    """All d^alpha_x d^beta_xi F on the points, from one jet per chunk where the symbol allows it."""
    n = F.n_modes
    use_jet = hasattr(F, "jet") or (isinstance(F, ClosedFormSymbol) and F.jet_capable)
    if not use_jet:
        return {(a, b): F.derivative(a, b, x, xi) for a, b in pairs}
    per_point = (order + 1) ** (2 * n)
    chunk = max(1, max_coeffs // per_point)
    parts: dict = {p: [] for p in pairs}
    for s in range(0, len(x), chunk):
        xc, xic = x[s:s + chunk], xi[s:s + chunk]
        if hasattr(F, "jet"):
            jet = F.jet(xc, xic, order)
        else:
            zs = variables(np.concatenate([xc, xic], axis=1), order)
            jet = F.func(zs[:n], zs[n:])
        for a, b in pairs:
            if hasattr(jet, "derivative"):
                parts[(a, b)].append(jet.derivative(a + b))
            else:
                parts[(a, b)].append(np.full(len(xc), complex(jet)) if sum(a) + sum(b) == 0 else np.zeros(len(xc)))
    return {p: np.concatenate(v) for p, v in parts.items()}


def certify_symbol(F: Symbol, cert: SymbolClassCert, x=None, xi=None, n_points: int = 200,
                   spread: float = 2.0, seed: int = 0) -> CertReport:
    """max over I_m and grid of |d^alpha_x d^beta_xi F| / (M prod_{S(alpha,beta)} eps_j^{alpha_j+beta_j})."""
    if x is None:
        x, xi = sample_points(F.n_modes, n_points, spread, seed)
    ids = F.modes.ids
    eps = np.array([cert.eps.get(j, 0.0) for j in ids])
    pairs = index_families(F.modes, cert.order).full()
    table = _derivative_table(F, pairs, x, xi, cert.order)
    worst, best = None, 0.0
    for (a, b), vals in table.items():
        k = np.array(a) + np.array(b)
        denom = cert.M * float(np.prod(np.where(k > 0, eps ** k, 1.0)))
        mag = float(np.max(np.abs(vals)))
        if denom == 0:
            r = 0.0 if mag <= 1e-12 * cert.M else math.inf
        else:
            r = mag / denom
        if r > best:
            best, worst = r, (a, b)
    return CertReport(best, worst, len(pairs) * len(x), cert.order)


def fit_eps_scale(F: Symbol, M: float, base: Mapping[int, float], order: int = 2, x=None, xi=None,
                  n_points: int = 200, spread: float = 2.0, seed: int = 0, headroom: float = 1.1) -> float:
    """Smallest C with |dF| <= M prod (C b_j)^{alpha_j+beta_j} on the sample, times `headroom`."""
    if x is None:
        x, xi = sample_points(F.n_modes, n_points, spread, seed)
    b = np.array([base[j] for j in F.modes.ids], dtype=float)
    pairs = [p for p in index_families(F.modes, order).full() if sum(p[0]) + sum(p[1]) > 0]
    table = _derivative_table(F, pairs, x, xi, order)
    C = 0.0
    for (a, bb), vals in table.items():
        k = np.array(a) + np.array(bb)
        mag = float(np.max(np.abs(vals))) / M
        denom = float(np.prod(b ** k))
        if mag <= 0:
            continue
        C = max(C, (mag / denom) ** (1.0 / k.sum()))
    return headroom * C


def trig_cert(F: TrigSymbol, order: int = 2) -> SymbolClassCert:
    """Exact certificate: M = sum |c_k|, eps_j = max_k max(|y_kj|, |eta_kj|)."""
    M = float(np.sum(np.abs(F.c)))
    eps = np.max(np.maximum(np.abs(F.y), np.abs(F.eta)), axis=0)
    return SymbolClassCert(M if M > 0 else 1.0, {j: float(e) for j, e in zip(F.modes.ids, eps)}, order)


# ---------------------------------------------------------------- norm estimation

def operator_norm_lower(A: OperatorMatrix | np.ndarray, tol: float = 1e-10, max_iter: int = 20_000,
                        seed: int = 0, block: int = 8) -> float:
    """Largest singular value by block power iteration on A^H A with Rayleigh-Ritz extraction.

    A block of `block` vectors converges at rate (sigma_{block+1}/sigma_1)^2, so clustered top
    singular values do not stall it.  The result is ||A v|| for a unit Ritz vector v, hence
    never above the true norm.
    """
    M = A.entries if isinstance(A, OperatorMatrix) else np.asarray(A)
    if M.size == 0:
        return 0.0
    n = M.shape[1]
    k = min(block, n)
    g = RngStream(seed, 13).generator()
    V, _ = np.linalg.qr(g.standard_normal((n, k)) + 1j * g.standard_normal((n, k)))
    for _ in range(max_iter):
        W = M.conj().T @ (M @ V)
        H = V.conj().T @ W
        theta, S = np.linalg.eigh(0.5 * (H + H.conj().T))
        top = theta[-1]
        if top <= 0:
            return 0.0
        v = V @ S[:, -1]
        resid = np.linalg.norm(W @ S[:, -1] - top * v)
        if resid <= tol * top or k == n:
            return float(np.linalg.norm(M @ v))
        V, _ = np.linalg.qr(W @ S[:, ::-1])
    raise NonConvergence(f"power iteration did not converge in {max_iter} steps")


# ---------------------------------------------------------------- kernel decay

def freeze_complement(F: Symbol, E: ModeSet, z=None, zeta=None) -> Symbol:
    """F_{Z_{E^c}}: the symbol as a function of the E variables with the others fixed."""
    rest = F.modes.difference(E)
    if len(rest) == 0:
        return F
    pe = F.modes.positions(E)
    pr = F.modes.positions(rest)
    z = np.zeros(len(rest)) if z is None else np.asarray(z, dtype=float)
    zeta = np.zeros(len(rest)) if zeta is None else np.asarray(zeta, dtype=float)
    if isinstance(F, TrigSymbol):
        phase = np.exp(-1j * (F.y[:, pr] @ z + F.eta[:, pr] @ zeta))
        return TrigSymbol(E, F.y[:, pe], F.eta[:, pe], F.c * phase)

    def frozen(xs, xis):
        npts = len(np.atleast_1d(xs[0]))
        x = np.empty((npts, F.n_modes))
        xi = np.empty((npts, F.n_modes))
        x[:, pe] = np.stack(xs, axis=1)
        xi[:, pe] = np.stack(xis, axis=1)
        x[:, pr] = z
        xi[:, pr] = zeta
        return F.evaluate(x, xi)

    return ClosedFormSymbol(E, frozen, False, "frozen")


def kernel_decay_rhs(cert: SymbolClassCert, E: ModeSet, h: float, X, Y, order: int | None = None) -> np.ndarray:
    """M (450 K sqrt h)^{|E|} prod_E eps_j (1+|x_j-y_j|^2/h)^{-1} (1+|xi_j-eta_j|^2/h)^{-1}."""
    order = cert.order if order is None else order
    K = cert.with_order(order).K
    eps = cert.eps_of(E)
    x, xi = X
    y, eta = Y
    if order == 2:
        pre = cert.M * (KERNEL_CONST * K * math.sqrt(h)) ** len(E) * float(np.prod(eps))
    else:
        pre = cert.M * (KERNEL_CONST * K * h) ** len(E) * float(np.prod(eps ** 2))
    decay = np.prod(1 / (1 + (x - y) ** 2 / h) / (1 + (xi - eta) ** 2 / h), axis=1)
    return pre * decay


@dataclass
class KernelDecayReport:
    max_ratio: float
    ratios: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    h: float
    meta: dict = field(default_factory=dict)


def kernel_decay_check(F: Symbol, cert: SymbolClassCert, E: ModeSet, h: float, pairs=None, n_pairs: int = 50,
                       spread: float = 2.0, seed: int = 0, Zc=None) -> KernelDecayReport:
    """max |<Op^weyl(T_h(E) F_Z) Psi_X, Psi_Y>| / bound over sampled coherent pairs."""
    _check_h(h)
    if not 1 <= len(E) <= 2:
        raise ValueError("E must have one or two modes")
    n = len(E)
    if pairs is None:
        g = RngStream(seed, 17).generator()
        P = spread * math.sqrt(h) * g.standard_normal((n_pairs, 4 * n))
        pairs = ((P[:, :n], P[:, n:2 * n]), (P[:, 2 * n:3 * n], P[:, 3 * n:]))
    X, Y = pairs
    Zc = (None, None) if Zc is None else Zc
    G = telescoping_apply(freeze_complement(F, E, *Zc), E, h)
    lhs = np.abs(weyl_coherent_element(G, X, Y, h))
    rhs = kernel_decay_rhs(cert, E, h, X, Y)
    ratios = lhs / rhs
    return KernelDecayReport(float(np.max(ratios)), ratios, lhs, rhs, h)


# ---------------------------------------------------------------- constants

@dataclass
class ConstantsReport:
    schur_constant: float
    schur_expected: float
    p_integrals: dict
    C: float
    passed: bool

    def as_dict(self) -> dict:
        return {"schur_constant": self.schur_constant, "schur_expected": self.schur_expected,
                "schur_error": abs(self.schur_constant - self.schur_expected),
                "p_integrals": {str(k): v for k, v in self.p_integrals.items()}, "C": self.C,
                "sqrt_C": math.sqrt(self.C), "passed": self.passed}


def schur_integral(h: float = 1.0) -> float:
    """(2 pi h)^{-1/2} int (1 + x^2/h)^{-1} dx."""
    half, _ = integrate.quad(lambda x: 1 / (1 + x * x / h), 0, np.inf, epsabs=0, epsrel=1e-13)
    return 2 * half / math.sqrt(2 * math.pi * h)


def p_integral(k: int) -> float:
    """pi^{-1/2} int |p_k(x)| e^{-x^2} dx, split at the roots of p_k."""
    p = P_POLYS[k]
    brk = {0: [-math.sqrt(3) / 2, math.sqrt(3) / 2], 1: [0.0], 2: []}[k]
    edges = [-np.inf] + brk + [np.inf]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, _ = integrate.quad(lambda x: abs(float(p(np.float64(x)))) * math.exp(-x * x), a, b,
                              epsabs=1e-14, epsrel=1e-13)
        total += v
    return total / math.sqrt(math.pi)


def paper_constants_selftest(h: float = 1.0, C: float = CONST_C) -> ConstantsReport:
    """Schur constant sqrt(pi/2) and the choice C = 25 against the three p_k integrals."""
    s = schur_integral(h)
    ints = {k: p_integral(k) for k in (0, 1, 2)}
    ok = abs(s - math.sqrt(math.pi / 2)) < 1e-10 and all(v <= math.sqrt(C) for v in ints.values())
    return ConstantsReport(s, math.sqrt(math.pi / 2), ints, C, ok)
