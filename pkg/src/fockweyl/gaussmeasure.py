"""Gaussian measures on finite mode sets, Monte Carlo integration and tail diagnostics.

The configuration measure mu^K has density (pi h)^{-|E|/2} e^{-|u|^2/h} (variance h/2
per coordinate); the phase measure mu^Phi has density (2 pi h)^{-|E|} e^{-(|x|^2+|xi|^2)/(2h)}
(variance h per coordinate).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import erfc

from .core_index import ModeSet


@dataclass(frozen=True)
class WeightSequence:
    """Positive weights b_j attached to lattice sites, ordered by lattice norm."""

    values: np.ndarray
    sites: np.ndarray | None = None
    rule: str = "explicit"
    gamma: float | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or np.any(vals <= 0):
            raise ValueError("weights must be a one-dimensional array of positive reals")
        object.__setattr__(self, "values", vals)

    @classmethod
    def power_law(cls, gamma: float, horizon: int, dim: int = 1, norm: str = "sup") -> "WeightSequence":
        """b_j = (1+|j|)^gamma for the first `horizon` sites of Z^dim, sorted by |j|."""
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        radius = 0
        while True:
            rng = range(-radius, radius + 1)
            sites = np.array(list(itertools.product(rng, repeat=dim)), dtype=int)
            if len(sites) >= horizon:
                break
            radius += 1
        ord_ = np.inf if norm == "sup" else 2
        norms = np.linalg.norm(sites, ord=ord_, axis=1)
        keys = np.lexsort(tuple(sites.T[::-1]) + (norms,))
        sites = sites[keys][:horizon]
        norms = norms[keys][:horizon]
        return cls((1.0 + norms) ** gamma, sites, "power_law", gamma)

    @classmethod
    def constant(cls, value: float, horizon: int) -> "WeightSequence":
        return cls(np.full(horizon, float(value)), None, "explicit")


def tail_integral(a) -> np.ndarray:
    """R = int_a^inf e^{-x^2/2} dx."""
    return math.sqrt(math.pi / 2) * erfc(np.asarray(a, dtype=float) / math.sqrt(2))


@dataclass
class SummabilityReport:
    terms: np.ndarray
    partial_sums: np.ndarray
    bound: np.ndarray
    bound_respected: bool
    verdict: str
    advisory: str = "heuristic ratio test over a finite horizon; not a proof"


def tail_summability_report(w: WeightSequence, eps: float, horizon: int | None = None) -> SummabilityReport:
    """Partial sums of R_j = int_{eps b_j}^inf e^{-x^2/2} dx with an advisory verdict.

    Also compares 2 (2 pi)^{-1/2} R_j against sqrt(2) e^{-eps^2 b_j^2 / 4}.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    b = w.values if horizon is None else w.values[:horizon]
    if len(b) < 1:
        raise ValueError("horizon must be at least 1")
    terms = tail_integral(eps * b)
    partial = np.cumsum(terms)
    bound = math.sqrt(2) * np.exp(-(eps * b) ** 2 / 4)
    respected = bool(np.all(2 / math.sqrt(2 * math.pi) * terms <= bound * (1 + 1e-12)))
    total = partial[-1]
    tail = terms[len(terms) // 2:]
    if total > 0 and terms[-1] <= 1e-12 * total:
        verdict = "summable"
    elif len(tail) >= 2 and np.all(tail[1:] <= tail[:-1]) and tail[-1] < 0.5 * tail[0]:
        # decreasing tail; geometric estimate of the remainder
        ratio = tail[-1] / tail[-2] if tail[-2] > 0 else 0.0
        verdict = "summable" if ratio < 1 - 1e-3 else "inconclusive"
    else:
        verdict = "not summable"
    return SummabilityReport(terms, partial, bound, respected, verdict)


@dataclass(frozen=True)
class GaussianMeasureSpec:
    """Configuration (kind "K") or phase (kind "phi") Gaussian measure over a mode set."""

    modes: ModeSet
    h: float
    kind: str = "K"

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.kind not in ("K", "phi"):
            raise ValueError(f"unknown measure kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return len(self.modes) * (1 if self.kind == "K" else 2)

    @property
    def variance(self) -> float:
        return self.h / 2 if self.kind == "K" else self.h

    def density(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        v = self.variance
        return (2 * math.pi * v) ** (-self.dim / 2) * np.exp(-np.sum(pts ** 2, axis=-1) / (2 * v))

    def restrict(self, sub: ModeSet) -> "GaussianMeasureSpec":
        return GaussianMeasureSpec(self.modes.intersection(sub), self.h, self.kind)


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by (master_seed, stream_id)."""

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.master_seed & (2 ** 64 - 1), self.stream_id & (2 ** 64 - 1)], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, k: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_id * 1_000_003 + k + 1)


def sample(spec: GaussianMeasureSpec, rng: RngStream, n: int) -> np.ndarray:
    """n i.i.d. samples, shape (n, dim); for kind "phi" the columns are (x_1..x_k, xi_1..xi_k)."""
    if n < 1:
        raise ValueError("n must be positive")
    g = rng.generator()
    return math.sqrt(spec.variance) * g.standard_normal((n, spec.dim))


def ell_a(a, x) -> np.ndarray:
    """l_a(x) = sum_j a_j x_j for x of shape (..., n)."""
    return np.asarray(x) @ np.asarray(a)


def exp_ell(a, x) -> np.ndarray:
    return np.exp(ell_a(a, x))


class NonFiniteEvaluation(ArithmeticError):
    def __init__(self, point):
        super().__init__(f"integrand is not finite at {np.asarray(point).tolist()}")
        self.point = np.asarray(point)


@dataclass
class MCEstimate:
    mean: complex | float
    stderr: float
    n: int

    def within(self, value, nsigma: float = 3.0) -> bool:
        return abs(self.mean - value) <= nsigma * self.stderr + 1e-15


def mc_integrate(f: Callable[[np.ndarray], np.ndarray], spec: GaussianMeasureSpec, rng: RngStream,
                 n: int, batch: int = 100_000) -> MCEstimate:
    """Sample mean and standard error of f under the measure; deterministic in (seed, id, n)."""
    pts = sample(spec, rng, n)
    vals = []
    for s in range(0, n, batch):
        chunk = pts[s:s + batch]
        v = np.asarray(f(chunk))
        bad = ~np.isfinite(v)
        if np.any(bad):
            raise NonFiniteEvaluation(chunk[np.argmax(bad)])
        vals.append(v)
    v = np.concatenate(vals)
    mean = v.mean()
    stderr = float(np.sqrt(np.sum(np.abs(v - mean) ** 2) / (n * max(n - 1, 1)))) if n > 1 else 0.0
    if not np.iscomplexobj(v):
        mean = float(mean)
    return MCEstimate(mean, stderr, n)


@dataclass
class DivergenceProbe:
    N_list: list[int]
    medians: np.ndarray
    n_samples: int


def cameron_martin_divergence_probe(h: float, N_list: Sequence[int], rng: RngStream,
                                    n_samples: int = 10_000) -> DivergenceProbe:
    """Median over samples of sum_{k<N} x_k^2 under the configuration measure."""
    if not h > 0:
        raise ValueError("h must be positive")
    N_list = [int(N) for N in N_list]
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be increasing")
    spec = GaussianMeasureSpec(ModeSet.range(N_list[-1]), h, "K")
    x = sample(spec, rng, n_samples)
    csum = np.cumsum(x ** 2, axis=1)
    medians = np.array([np.median(csum[:, N - 1]) for N in N_list])
    return DivergenceProbe(N_list, medians, n_samples)
