"""Phase-space symbols: trigonometric atoms, Gaussian sums and closed forms.

Points are arrays x, xi of shape (npts, n) over the symbol's modes.  Gaussian quadratic
forms act on Z = (x_1..x_n, xi_1..xi_n).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..core_index import ModeSet
from ..hermite import gauss_hermite_rule, tensor_grid
from ..jets import Jet, variables


def _points(x, xi, n: int) -> tuple[np.ndarray, np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    return x.reshape(-1, n), np.asarray(xi, dtype=float).reshape(-1, n), single


class Symbol:
    """Base class; subclasses implement evaluation, derivatives and heat smoothing."""

    kind = "abstract"
    modes: ModeSet

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def __call__(self, x, xi):
        x, xi, single = _points(x, xi, self.n_modes)
        vals = self.evaluate(x, xi)
        return vals[0] if single else vals

    def evaluate(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, alpha: Sequence[int], beta: Sequence[int], x, xi) -> np.ndarray:
        """d_x^alpha d_xi^beta F at points."""
        raise NotImplementedError

    def is_real(self, tol: float = 1e-12) -> bool:
        rng = np.random.default_rng(12345)
        pts = rng.normal(size=(64, 2 * self.n_modes)) * 2
        v = self.evaluate(pts[:, :self.n_modes], pts[:, self.n_modes:])
        return bool(np.max(np.abs(np.imag(v))) <= tol * max(1.0, np.max(np.abs(v))))

    def _mode_positions(self, D: ModeSet) -> list[int]:
        if not D.issubset(self.modes):
            raise ValueError(f"modes {D.ids} are not all in the symbol's modes {self.modes.ids}")
        return self.modes.positions(D)


@dataclass
class TrigSymbol(Symbol):
    """F(x, xi) = sum_k c_k exp(-i (y_k . x + eta_k . xi))."""

    modes: ModeSet
    y: np.ndarray
    eta: np.ndarray
    c: np.ndarray
    kind: str = field(default="trig", init=False)

    def __post_init__(self):
        n = len(self.modes)
        self.c = np.atleast_1d(np.asarray(self.c, dtype=complex))
        K = len(self.c)
        self.y = np.asarray(self.y, dtype=float).reshape(K, n)
        self.eta = np.asarray(self.eta, dtype=float).reshape(K, n)

    @property
    def n_atoms(self) -> int:
        return len(self.c)

    def evaluate(self, x, xi):
        phase = x @ self.y.T + xi @ self.eta.T
        return np.exp(-1j * phase) @ self.c

    def derivative(self, alpha, beta, x, xi):
        x, xi, single = _points(x, xi, self.n_modes)
        a = np.asarray(alpha)
        b = np.asarray(beta)
        fac = self.c * np.prod((-1j * self.y) ** a * (-1j * self.eta) ** b, axis=1)
        vals = np.exp(-1j * (x @ self.y.T + xi @ self.eta.T)) @ fac
        return vals[0] if single else vals

    def with_coefficients(self, c) -> "TrigSymbol":
        return TrigSymbol(self.modes, self.y.copy(), self.eta.copy(), np.asarray(c, dtype=complex))

    def heat_smooth(self, D: ModeSet, h: float) -> "TrigSymbol":
        p = self._mode_positions(D)
        damp = np.exp(-(h / 4) * (np.sum(self.y[:, p] ** 2, axis=1) + np.sum(self.eta[:, p] ** 2, axis=1)))
        return self.with_coefficients(self.c * damp)

    def telescope(self, E: ModeSet, h: float) -> "TrigSymbol":
        p = self._mode_positions(E)
        mult = np.prod(1 - np.exp(-(h / 4) * (self.y[:, p] ** 2 + self.eta[:, p] ** 2)), axis=1)
        return self.with_coefficients(self.c * mult)


@dataclass
class GaussSymbol(Symbol):
    """F(Z) = sum_k c_k exp(-Z^T A_k Z) with symmetric positive semidefinite A_k."""

    modes: ModeSet
    terms: list
    kind: str = field(default="gauss_quad", init=False)

    def __post_init__(self):
        n = len(self.modes)
        clean = []
        for coef, A in self.terms:
            A = np.asarray(A, dtype=float)
            if A.shape != (2 * n, 2 * n):
                raise ValueError(f"quadratic form must be {2 * n}x{2 * n}")
            if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, np.abs(A).max()):
                raise ValueError("quadratic form must be symmetric")
            A = 0.5 * (A + A.T)
            lam = np.linalg.eigvalsh(A).min() if n else 0.0
            if lam < -1e-12:
                raise ValueError(f"quadratic form is not positive semidefinite (eigenvalue {lam:.3e})")
            clean.append((complex(coef), A))
        self.terms = clean

    @classmethod
    def single(cls, modes: ModeSet, A, coef: complex = 1.0) -> "GaussSymbol":
        return cls(modes, [(coef, A)])

    def evaluate(self, x, xi):
        Z = np.concatenate([x, xi], axis=1)
        out = np.zeros(len(Z), dtype=complex)
        for coef, A in self.terms:
            out += coef * np.exp(-np.einsum("pi,ij,pj->p", Z, A, Z))
        return out

    def jet(self, x, xi, m: int):
        Z = np.concatenate([x, xi], axis=1)
        zs = variables(Z, m)
        out = None
        for coef, A in self.terms:
            q = None
            for i in range(len(zs)):
                for j in range(len(zs)):
                    if A[i, j] != 0:
                        term = zs[i] * zs[j] * A[i, j]
                        q = term if q is None else q + term
            e = np.exp(-q) * coef if q is not None else Jet.constant_like(zs[0], coef)
            out = e if out is None else out + e
        return out

    def derivative(self, alpha, beta, x, xi):
        x, xi, single = _points(x, xi, self.n_modes)
        gamma = tuple(alpha) + tuple(beta)
        m = max(max(gamma), 1)
        vals = self.jet(x, xi, m).derivative(gamma)
        return vals[0] if single else vals

    def heat_smooth(self, D: ModeSet, h: float) -> "GaussSymbol":
        p = self._mode_positions(D)
        if not p:
            return GaussSymbol(self.modes, list(self.terms))
        n = self.n_modes
        idx = p + [n + q for q in p]
        out = []
        for coef, A in self.terms:
            Edd = A[np.ix_(idx, idx)]
            Q = Edd + np.eye(len(idx)) / h
            AE = A[:, idx]
            A_new = A - AE @ np.linalg.solve(Q, AE.T)
            scale = np.linalg.det(np.eye(len(idx)) + h * Edd) ** -0.5
            out.append((coef * scale, 0.5 * (A_new + A_new.T)))
        return GaussSymbol(self.modes, out)

    def telescope(self, E: ModeSet, h: float) -> "GaussSymbol":
        terms = []
        for S in E.subsets():
            sm = self.heat_smooth(S, h)
            sign = (-1) ** len(S)
            terms += [(sign * c, A) for c, A in sm.terms]
        return GaussSymbol(self.modes, terms)


@dataclass
class ClosedFormSymbol(Symbol):
    """Symbol given by an evaluator f(x, xi) on mode-major arrays x[j], xi[j].

    When ``jet_capable`` is true the evaluator must accept lists of Jets (only numpy ufuncs
    and arithmetic inside), which gives exact mixed derivatives; otherwise derivatives use
    central finite differences with one Richardson step.
    """

    modes: ModeSet
    func: Callable
    jet_capable: bool = False
    name: str = "closed_form"
    kind: str = field(default="closed_form", init=False)

    def evaluate(self, x, xi):
        return np.asarray(self.func(list(x.T), list(xi.T)), dtype=complex) * np.ones(len(x))

    def derivative(self, alpha, beta, x, xi):
        x, xi, single = _points(x, xi, self.n_modes)
        gamma = tuple(alpha) + tuple(beta)
        if self.jet_capable:
            m = max(max(gamma), 1)
            n = self.n_modes
            zs = variables(np.concatenate([x, xi], axis=1), m)
            val = self.func(zs[:n], zs[n:])
            vals = val.derivative(gamma) if hasattr(val, "derivative") else (
                np.full(len(x), complex(val)) if sum(gamma) == 0 else np.zeros(len(x)))
        else:
            vals = finite_difference(self, gamma, x, xi)
        return vals[0] if single else vals

    def heat_smooth(self, D: ModeSet, h: float, order: int = 20) -> "ClosedFormSymbol":
        p = self._mode_positions(D)
        if not p:
            return self
        n = self.n_modes
        nodes, w = tensor_grid(gauss_hermite_rule(order), 2 * len(p))
        w = w / math.pi ** len(p)
        shifts = math.sqrt(h) * nodes
        base = self

        def smoothed(xs, xis):
            x = np.stack(xs, axis=1)
            xi = np.stack(xis, axis=1)
            acc = np.zeros(len(x), dtype=complex)
            for s, wk in zip(shifts, w):
                xx = x.copy()
                xx[:, p] -= s[:len(p)]
                xxi = xi.copy()
                xxi[:, p] -= s[len(p):]
                acc += wk * base.evaluate(xx, xxi)
            return acc

        return ClosedFormSymbol(self.modes, smoothed, False, f"heat[{D.ids}]({self.name})")

    def telescope(self, E: ModeSet, h: float) -> "ClosedFormSymbol":
        parts = [((-1) ** len(S), self.heat_smooth(S, h)) for S in E.subsets()]

        def total(xs, xis):
            x = np.stack(xs, axis=1)
            xi = np.stack(xis, axis=1)
            return sum(s * sym.evaluate(x, xi) for s, sym in parts)

        return ClosedFormSymbol(self.modes, total, False, f"T[{E.ids}]({self.name})")


def finite_difference(F: Symbol, gamma: Sequence[int], x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Mixed derivative by tensor central differences, one Richardson extrapolation step."""
    n = F.n_modes
    Z = np.concatenate([x, xi], axis=1)
    steps0 = 1e-4 * np.maximum(1.0, np.abs(Z))
    if sum(gamma) > 8:
        raise ArithmeticError("finite differences break down above total order 8; supply a jet evaluator")

    def stencil(scale):
        steps = steps0 * scale
        acc = np.zeros(len(Z), dtype=complex)
        per_var = []
        for i, g in enumerate(gamma):
            if g == 0:
                per_var.append([(0, 1.0)])
            else:
                # central difference of order g: sum_k (-1)^k C(g,k) f(z + (g/2 - k) s)
                per_var.append([((g / 2 - k), (-1) ** k * math.comb(g, k)) for k in range(g + 1)])
        for combo in itertools.product(*per_var):
            shift = np.array([c[0] for c in combo])
            wgt = math.prod(c[1] for c in combo)
            Zs = Z + shift * steps
            acc += wgt * F.evaluate(Zs[:, :n], Zs[:, n:])
        return acc / np.prod(steps ** np.asarray(gamma), axis=1)

    d1 = stencil(1.0)
    if sum(gamma) == 0:
        return d1
    d2 = stencil(0.5)
    return (4 * d2 - d1) / 3


def trig_atom(modes: ModeSet, y, eta, c: complex = 1.0) -> TrigSymbol:
    return TrigSymbol(modes, np.atleast_2d(y), np.atleast_2d(eta), [c])


def constant_symbol(modes: ModeSet, value: complex = 1.0) -> TrigSymbol:
    n = len(modes)
    return TrigSymbol(modes, np.zeros((1, n)), np.zeros((1, n)), [value])


def heat_smooth(F: Symbol, D: ModeSet, h: float) -> Symbol:
    """e^{(h/4) Delta_D} F: Gaussian convolution of variance h/2 in each coordinate of D."""
    if not h > 0:
        raise ValueError("h must be positive")
    return F.heat_smooth(D, h)


def telescoping_apply(F: Symbol, E: ModeSet, h: float) -> Symbol:
    """T_h(E) F = prod_{j in E} (I - e^{(h/4) Delta_j}) F."""
    if not h > 0:
        raise ValueError("h must be positive")
    return F.telescope(E, h)


def sum_symbols(parts: Sequence[tuple[complex, Symbol]]) -> Symbol:
    """Linear combination of symbols of one kind over one mode set."""
    kinds = {p[1].kind for p in parts}
    modes = parts[0][1].modes
    if len(kinds) != 1:
        raise ValueError("cannot combine symbols of different kinds")
    kind = kinds.pop()
    if kind == "trig":
        y = np.concatenate([p[1].y for p in parts])
        eta = np.concatenate([p[1].eta for p in parts])
        c = np.concatenate([s * sym.c for s, sym in parts])
        return TrigSymbol(modes, y, eta, c)
    if kind == "gauss_quad":
        return GaussSymbol(modes, [(s * c, A) for s, sym in parts for c, A in sym.terms])

    def total(xs, xis):
        x = np.stack(xs, axis=1)
        xi = np.stack(xis, axis=1)
        return sum(s * sym.evaluate(x, xi) for s, sym in parts)

    return ClosedFormSymbol(modes, total, False, "sum")
