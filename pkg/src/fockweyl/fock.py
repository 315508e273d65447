"""Truncated symmetric Fock spaces, ladder operators, Segal fields and coherent vectors.

All coefficients refer to the normalized basis e_alpha-hat = c_alpha e^alpha.  The Segal
field is Phi_S(X) = (a(X) + a*(X))/sqrt 2 with a*(X) = sum_j X_j a*_j (linear in X) and
a(X) = sum_j conj(X_j) a_j (antilinear).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .core_index import ModeSet, Truncation
from .hermite import normalized_hermite_table


class PadInsufficient(ArithmeticError):
    """The padded matrix exponential leaks past the padding more than allowed."""


@dataclass
class FockVector:
    """Coefficients over the enumerated normalized basis of a truncation.

    ``space`` is "config" for H(E) or "phase" for the Fock space over l^2(E)^2; in the
    phase case the truncation's first |E| modes carry u_j and the last |E| carry v_j.
    """

    truncation: Truncation
    coeffs: np.ndarray
    space: str = "config"

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (self.truncation.dim,):
            raise ValueError("coefficient vector does not match the truncation size")

    @classmethod
    def vacuum(cls, t: Truncation, space: str = "config") -> "FockVector":
        c = np.zeros(t.dim, dtype=complex)
        c[0] = 1.0
        return cls(t, c, space)

    @classmethod
    def basis(cls, t: Truncation, alpha) -> "FockVector":
        k = t.index(alpha)
        if k < 0:
            raise ValueError(f"{alpha} lies outside the truncation")
        c = np.zeros(t.dim, dtype=complex)
        c[k] = 1.0
        return cls(t, c)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def inner(self, other: "FockVector") -> complex:
        """<self, other>, linear in the first slot."""
        return complex(np.vdot(other.coeffs, self.coeffs))

    def __add__(self, other: "FockVector") -> "FockVector":
        return FockVector(self.truncation, self.coeffs + other.coeffs, self.space)

    def __rmul__(self, s) -> "FockVector":
        return FockVector(self.truncation, s * self.coeffs, self.space)


@dataclass
class OperatorMatrix:
    """Dense matrix of an operator in the truncation's normalized basis.

    Entry [m, n] is <A e_n, e_m>.
    """

    truncation: Truncation
    entries: np.ndarray
    hermitian: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        d = self.truncation.dim
        if self.entries.shape != (d, d):
            raise ValueError(f"matrix shape {self.entries.shape} does not match truncation size {d}")
        if self.hermitian and self.hermiticity_deficit() > 1e-12 * max(1.0, np.abs(self.entries).max()):
            raise ValueError("matrix flagged Hermitian is not Hermitian")

    @property
    def dim(self) -> int:
        return self.truncation.dim

    def hermiticity_deficit(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T))) if self.dim else 0.0

    @property
    def H(self) -> "OperatorMatrix":
        return OperatorMatrix(self.truncation, self.entries.conj().T, self.hermitian)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.truncation, self.entries + other.entries)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.truncation, self.entries - other.entries)

    def __rmul__(self, s) -> "OperatorMatrix":
        return OperatorMatrix(self.truncation, s * self.entries)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(self.truncation, self.entries @ other.entries)
        if isinstance(other, FockVector):
            return FockVector(self.truncation, self.entries @ other.coeffs, other.space)
        return self.entries @ other

    def crop(self, t: Truncation) -> "OperatorMatrix":
        pos = self.truncation.embed_positions(t)
        return OperatorMatrix(t, self.entries[np.ix_(pos, pos)], meta=dict(self.meta))

    def max_diff(self, other) -> float:
        other = other.entries if isinstance(other, OperatorMatrix) else np.asarray(other)
        return float(np.max(np.abs(self.entries - other)))


@dataclass(frozen=True)
class PhasePoint:
    """A phase-space point X = (x, xi) over a mode set."""

    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        if x.shape != xi.shape or x.ndim != 1:
            raise ValueError("x and xi must be vectors of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xi))):
            raise ValueError("phase point must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    def __len__(self) -> int:
        return len(self.x)

    def __add__(self, other: "PhasePoint") -> "PhasePoint":
        return PhasePoint(self.x + other.x, self.xi + other.xi)


def _as_modes_vector(X, t: Truncation) -> np.ndarray:
    X = np.atleast_1d(np.asarray(X, dtype=complex))
    if X.shape != (len(t.modes),):
        raise ValueError(f"vector of length {X.shape} does not match {len(t.modes)} modes")
    if not np.all(np.isfinite(X)):
        raise ValueError("vector must be finite")
    return X


def ladder_matrices(j: int, t: Truncation) -> tuple[OperatorMatrix, OperatorMatrix]:
    """(a_j, a*_j) on the truncation; creation past the cap is dropped."""
    if j not in t.modes:
        raise ValueError(f"mode {j} is not in the truncation")
    p = t.modes.position(j)
    up = t.shift_map(p, +1)
    occ = t.array[:, p]
    create = np.zeros((t.dim, t.dim))
    cols = np.nonzero(up >= 0)[0]
    create[up[cols], cols] = np.sqrt(occ[cols] + 1.0)
    return OperatorMatrix(t, create.T.copy()), OperatorMatrix(t, create)


def segal_field_matrix(X, t: Truncation) -> OperatorMatrix:
    """Phi_S(X) = (a(X) + a*(X))/sqrt 2 on the truncation."""
    X = _as_modes_vector(X, t)
    out = np.zeros((t.dim, t.dim), dtype=complex)
    for k, j in enumerate(t.modes):
        if X[k] == 0:
            continue
        a, ad = ladder_matrices(j, t)
        out += np.conj(X[k]) * a.entries + X[k] * ad.entries
    out /= math.sqrt(2.0)
    return OperatorMatrix(t, 0.5 * (out + out.conj().T), hermitian=True)


def coherent_vector(X, t: Truncation) -> FockVector:
    """Truncation of e^{i Phi_S(X)} Omega: product over modes of e^{-|X_j|^2/4} (i X_j/sqrt 2)^n / sqrt(n!)."""
    X = _as_modes_vector(X, t)
    alpha = t.array
    c = np.ones(t.dim, dtype=complex)
    for k in range(len(t.modes)):
        z = 1j * X[k] / math.sqrt(2.0)
        col = _normalized_powers(z, t.per_mode_cap)
        c *= math.exp(-abs(X[k]) ** 2 / 4) * col[alpha[:, k]]
    return FockVector(t, c)


def _normalized_powers(z, nmax: int) -> np.ndarray:
    """z^n / sqrt(n!) for n = 0..nmax (z scalar or array, leading axis n)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty((nmax + 1,) + z.shape, dtype=complex)
    out[0] = 1.0
    for n in range(nmax):
        out[n + 1] = out[n] * z / math.sqrt(n + 1)
    return out


def coherent_coefficients(x, xi, h: float, t: Truncation) -> np.ndarray:
    """Coefficients of phi_{X,h} = e^{(i/sqrt h) Phi_S(xi - i x)} Omega for many phase points.

    x, xi have shape (npts, n); returns (npts, dim).  Per mode the coefficient on e_n is
    e^{-|z|^2/2} z^n/sqrt(n!) with z = (x + i xi)/sqrt(2h).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    alpha = t.array
    out = np.ones((x.shape[0], t.dim), dtype=complex)
    for k in range(len(t.modes)):
        z = (x[:, k] + 1j * xi[:, k]) / math.sqrt(2 * h)
        pw = _normalized_powers(z, t.per_mode_cap)  # (cap+1, npts)
        out *= (np.exp(-np.abs(z) ** 2 / 2) * pw)[alpha[:, k]].T
    return out


def _boundary_rows(tp: Truncation) -> np.ndarray:
    arr = tp.array
    if arr.shape[1] == 0:
        return np.zeros(tp.dim, dtype=bool)
    return (arr.max(axis=1) >= tp.per_mode_cap) | (arr.sum(axis=1) >= tp.total_degree_cap)


def weyl_translation_matrix(X, t: Truncation, pad: int | None = None,
                            deficit_tol: float | None = None) -> OperatorMatrix:
    """exp(i Phi_S(X)) computed on the truncation enlarged by `pad`, then cropped.

    meta["column_deficit"] holds, per cropped column, the norm the padded column puts on the
    outermost layer of the padded truncation; meta["deficit"] is its maximum.
    """
    if pad is None:
        pad = math.ceil(t.per_mode_cap / 2)
    if pad < 0:
        raise ValueError("pad must be nonnegative")
    tp = t.padded(pad)
    gen = segal_field_matrix(X, tp).entries
    U = expm(1j * gen)
    pos = tp.embed_positions(t)
    bnd = _boundary_rows(tp)
    col_def = np.linalg.norm(U[np.ix_(bnd, pos)], axis=0) if bnd.any() else np.zeros(t.dim)
    deficit = float(col_def.max()) if col_def.size else 0.0
    if deficit_tol is not None and deficit > deficit_tol:
        raise PadInsufficient(f"translation leak {deficit:.3e} exceeds {deficit_tol:.1e} at pad {pad}")
    return OperatorMatrix(t, U[np.ix_(pos, pos)],
                          meta={"pad": pad, "deficit": deficit, "column_deficit": col_def})


def translation_with_escalation(X, t: Truncation, pad: int | None = None, deficit_tol: float = 1e-10,
                                max_pad: int = 64, columns: int | None = None) -> OperatorMatrix:
    """Translation matrix, doubling the pad until the leak in the first `columns` columns is below tol."""
    pad = math.ceil(t.per_mode_cap / 2) if pad is None else pad
    pad = max(pad, 1)
    while True:
        U = weyl_translation_matrix(X, t, pad)
        cd = U.meta["column_deficit"]
        leak = float(cd[:columns].max()) if columns is not None else U.meta["deficit"]
        if leak <= deficit_tol:
            return U
        if pad >= max_pad:
            raise PadInsufficient(f"pad escalation exhausted at pad {pad} (leak {leak:.3e})")
        pad = min(2 * pad, max_pad)


def phase_truncation(t: Truncation) -> Truncation:
    """Truncation of the phase Fock space receiving W_E of the configuration truncation t."""
    n = len(t.modes)
    return Truncation(ModeSet.range(2 * n), t.per_mode_cap, t.total_degree_cap)


def _single_mode_w_expansion(m: int) -> list[tuple[int, int, complex]]:
    """Normalized w^m c_m = sum_p coeff |p>_u |m-p>_v, from ((u - i v)/sqrt 2)^m."""
    out = []
    for p in range(m + 1):
        c = math.comb(m, p) * (-1j) ** (m - p) * math.sqrt(
            math.factorial(p) * math.factorial(m - p) / (2.0 ** m * math.factorial(m)))
        out.append((p, m - p, c))
    return out


def bargmann_functor_matrix(t: Truncation) -> np.ndarray:
    """Matrix of W_E from the configuration truncation into phase_truncation(t)."""
    tp = phase_truncation(t)
    n = len(t.modes)
    W = np.zeros((tp.dim, t.dim), dtype=complex)
    cache: dict[int, list] = {}
    for col, alpha in enumerate(t.tuples):
        parts = [cache.setdefault(a, _single_mode_w_expansion(a)) for a in alpha]
        for combo in itertools.product(*parts):
            u = tuple(c[0] for c in combo)
            v = tuple(c[1] for c in combo)
            coef = np.prod([c[2] for c in combo]) if n else 1.0
            W[tp.index(u + v), col] += coef
    return W


def bargmann_functor_map(v: FockVector) -> FockVector:
    """W_E on a configuration vector; isometric, tensorial over modes."""
    if v.space != "config":
        raise ValueError("the Bargmann functor acts on configuration vectors")
    W = bargmann_functor_matrix(v.truncation)
    return FockVector(phase_truncation(v.truncation), W @ v.coeffs, "phase")


def _product_tables(tables: list[np.ndarray], alpha: np.ndarray) -> np.ndarray:
    """prod_k tables[k][alpha[:, k]] -> shape (dim, npts)."""
    out = np.ones((alpha.shape[0],) + tables[0].shape[1:], dtype=np.result_type(*tables)) if tables else \
        np.ones((alpha.shape[0], 1))
    for k, tab in enumerate(tables):
        out = out * tab[alpha[:, k]]
    return out


def segal_iso_eval(v: FockVector, h: float, side: str, point) -> np.ndarray:
    """Evaluate J(v) at points through the orthonormal function family.

    side "K": configuration points u of shape (npts, n) (or a single point) and family
    c_alpha P_{alpha,h}.  side "phi": a phase vector over 2n modes evaluated at (x, xi),
    family c_beta c_gamma P_{beta gamma,h}.
    """
    t = v.truncation
    if side == "K":
        if v.space != "config":
            raise ValueError("side K expects a configuration vector")
        u = np.atleast_2d(np.asarray(point, dtype=float))
        n = len(t.modes)
        if u.shape[-1] != n:
            raise ValueError("point dimension does not match the mode count")
        s = math.sqrt(2.0 / h)
        tabs = [normalized_hermite_table(t.per_mode_cap, u[:, k] * s) for k in range(n)]
        vals = v.coeffs @ _product_tables(tabs, t.array)
    elif side == "phi":
        if v.space != "phase":
            raise ValueError("side phi expects a phase vector; apply bargmann_functor_map first")
        x, xi = point
        x = np.atleast_2d(np.asarray(x, dtype=float))
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        n = len(t.modes) // 2
        if x.shape[-1] != n:
            raise ValueError("point dimension does not match the mode count")
        s = 1.0 / math.sqrt(h)
        tabs = [normalized_hermite_table(t.per_mode_cap, x[:, k] * s) for k in range(n)]
        tabs += [normalized_hermite_table(t.per_mode_cap, xi[:, k] * s) for k in range(n)]
        vals = v.coeffs @ _product_tables(tabs, t.array)
    else:
        raise ValueError(f"unknown side {side!r}")
    return vals
