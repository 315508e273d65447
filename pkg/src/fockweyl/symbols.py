"""Example symbols: lattice Gaussians, the mean-field family P_N, and trig atom sums."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bounds import SymbolClassCert, fit_eps_scale, trig_cert
from .core_index import ModeSet
from .quantize.symbol import ClosedFormSymbol, GaussSymbol, TrigSymbol


def _neighbours(sites: list[tuple[int, ...]], norm: str) -> list[tuple[int, int]]:
    """Ordered pairs (j, k) of window positions at lattice distance exactly 1."""
    out = []
    for j, a in enumerate(sites):
        for k, b in enumerate(sites):
            diff = [abs(p - q) for p, q in zip(a, b)]
            if norm == "sup":
                dist = max(diff) if diff else 0
            elif norm == "l1":
                dist = sum(diff)
            else:
                raise ValueError(f"unknown lattice norm {norm!r}")
            if dist == 1:
                out.append((j, k))
    return out


@dataclass
class LatticeGaussianSymbol:
    """F = exp(-H), H = sum g_j^2 (x_j^2 + xi_j^2) + lam sum_{|j-k|=1} g_j g_k x_j x_k."""

    d: int
    sites: list
    g: np.ndarray
    lam: float
    norm: str
    matrix: np.ndarray
    symbol: GaussSymbol
    fitted: dict = field(default_factory=dict)

    @property
    def modes(self) -> ModeSet:
        return self.symbol.modes

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())

    def suggested_cert(self, order: int = 2, n_points: int = 200, spread: float = 1.5, seed: int = 0,
                       headroom: float = 1.1) -> SymbolClassCert:
        """eps_j = C_m g_j with C_m fitted on a sample (with headroom); M = 1."""
        base = {j: float(gj) for j, gj in zip(self.modes.ids, self.g)}
        C = fit_eps_scale(self.symbol, 1.0, base, order, n_points=n_points, spread=spread, seed=seed,
                          headroom=headroom)
        self.fitted[order] = C
        return SymbolClassCert(1.0, {j: C * b for j, b in base.items()}, order)


def lattice_gaussian(d: int, window, g, lam: float, norm: str = "sup") -> LatticeGaussianSymbol:
    """Gaussian symbol on a finite window of Z^d; rejects an indefinite H."""
    sites = [tuple(np.atleast_1d(s).astype(int).tolist()) for s in window]
    if any(len(s) != d for s in sites):
        raise ValueError(f"window sites must have {d} coordinates")
    n = len(sites)
    gv = np.array([g(s) for s in sites] if callable(g) else np.broadcast_to(np.asarray(g, dtype=float), (n,)),
                  dtype=float)
    if np.any(gv <= 0):
        raise ValueError("g_j must be positive")
    A = np.zeros((2 * n, 2 * n))
    A[:n, :n] = np.diag(gv ** 2)
    A[n:, n:] = np.diag(gv ** 2)
    for j, k in _neighbours(sites, norm):
        A[j, k] += lam * gv[j] * gv[k]
    lo = float(np.linalg.eigvalsh(A).min())
    if lo <= 0:
        raise ValueError(f"H is not positive definite: smallest eigenvalue {lo:.6g}")
    modes = ModeSet(tuple(range(n)))
    return LatticeGaussianSymbol(d, sites, gv, float(lam), norm, A, GaussSymbol(modes, [(1.0, A)]))


def one_minus_cos(s):
    return 1 - np.cos(s)


@dataclass
class ExampleFifteenSymbol:
    size: int
    symbol: ClosedFormSymbol
    cert: SymbolClassCert
    include_diagonal: bool


def example15_symbol(N: int, V: Callable = one_minus_cos, include_diagonal: bool = True,
                     jet_capable: bool = True) -> ClosedFormSymbol:
    """P_N = exp(-(sum xi_j^2 + sum_{|j-k|<=1} V(x_j - x_k)) / N) on the window {0, ..., N-1}."""
    if N < 1:
        raise ValueError("the window must be nonempty")
    pairs = [(j, k) for j in range(N) for k in range(N) if abs(j - k) <= 1 and (include_diagonal or j != k)]

    def P(xs, xis):
        H = 0.0
        for z in xis:
            H = H + z * z
        for j, k in pairs:
            H = H + V(xs[j] - xs[k])
        return np.exp(-H * (1.0 / N))

    return ClosedFormSymbol(ModeSet(tuple(range(N))), P, jet_capable, f"P_{N}")


def example15_family(sizes: Sequence[int], V: Callable = one_minus_cos, include_diagonal: bool = True,
                     order: int = 4, C1: float | None = None, n_points: int = 200, spread: float = 2.0,
                     seed: int = 0, headroom: float = 1.1, max_fit_size: int = 2
                     ) -> tuple[list[ExampleFifteenSymbol], float]:
    """Symbols P_N with certs eps_j = C_1 N^{-1/2}, M = 1.

    Unless given, C_1 is fitted on the members with N <= max_fit_size: full order-4 jets grow
    like 5^(2N) coefficients per point.
    """
    syms = [example15_symbol(N, V, include_diagonal) for N in sizes]
    if C1 is None:
        C1 = 0.0
        for N, S in zip(sizes, syms):
            if N > max_fit_size:
                continue
            base = {j: N ** -0.5 for j in S.modes.ids}
            C1 = max(C1, fit_eps_scale(S, 1.0, base, order, n_points=n_points, spread=spread, seed=seed,
                                       headroom=headroom))
    out = [ExampleFifteenSymbol(N, S, SymbolClassCert(1.0, {j: C1 * N ** -0.5 for j in S.modes.ids}, order),
                                include_diagonal) for N, S in zip(sizes, syms)]
    return out, C1


def example15_limit_constant(C1: float, h: float) -> float:
    """C_2 with cv_bound(P_N) <= (1 + C_2/N)^N <= e^{C_2} for every N (order-4 bound)."""
    K = max(1.0, C1 ** 6)
    return 225 * math.pi * K * h * C1 ** 2


def trig_from_atoms(atoms, modes: ModeSet | None = None, order: int = 2) -> tuple[TrigSymbol, SymbolClassCert]:
    """Trig symbol sum_k c_k e^{-i(y_k x + eta_k xi)} from (y, eta, c) triples, with its exact cert."""
    atoms = list(atoms)
    if not atoms:
        raise ValueError("at least one atom is required")
    y = np.array([np.atleast_1d(a[0]) for a in atoms], dtype=float)
    eta = np.array([np.atleast_1d(a[1]) for a in atoms], dtype=float)
    c = np.array([a[2] for a in atoms], dtype=complex)
    modes = ModeSet(tuple(range(y.shape[1]))) if modes is None else modes
    F = TrigSymbol(modes, y, eta, c)
    return F, trig_cert(F, order)


def cosine_symbol(modes: ModeSet, y, eta, amplitude: float = 1.0) -> tuple[TrigSymbol, SymbolClassCert]:
    """amplitude * cos(y x + eta xi) as a conjugate pair of atoms."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    return trig_from_atoms([(y, eta, amplitude / 2), (-y, -eta, amplitude / 2)], modes)


def random_trig(modes: ModeSet, n_atoms: int, rng: np.random.Generator, scale: float = 1.0,
                real: bool = True) -> tuple[TrigSymbol, SymbolClassCert]:
    """Random atoms; with ``real`` the atoms come in conjugate pairs so F is real."""
    n = len(modes)
    atoms = []
    for _ in range(n_atoms):
        y = scale * rng.uniform(-1, 1, n)
        eta = scale * rng.uniform(-1, 1, n)
        c = rng.normal() + (0 if real else 1j * rng.normal())
        if real:
            atoms += [(y, eta, c / 2), (-y, -eta, c / 2)]
        else:
            atoms.append((y, eta, c))
    return trig_from_atoms(atoms, modes)
