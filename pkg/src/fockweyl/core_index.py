"""Mode sets, multi-indices, truncations and the derivative index families."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np


@dataclass(frozen=True)
class ModeSet:
    """An ordered set of distinct mode ids (small nonnegative integers)."""

    ids: tuple[int, ...] = ()

    def __post_init__(self):
        ids = tuple(int(i) for i in self.ids)
        if any(i < 0 for i in ids):
            raise ValueError("mode ids must be nonnegative")
        if any(b <= a for a, b in zip(ids, ids[1:])):
            raise ValueError(f"mode ids must be strictly increasing: {ids}")
        object.__setattr__(self, "ids", ids)

    @classmethod
    def of(cls, ids: Iterable[int]) -> "ModeSet":
        return cls(tuple(sorted(set(int(i) for i in ids))))

    @classmethod
    def range(cls, n: int) -> "ModeSet":
        return cls(tuple(range(n)))

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[int]:
        return iter(self.ids)

    def __contains__(self, j) -> bool:
        return j in self.ids

    def issubset(self, other: "ModeSet") -> bool:
        return set(self.ids) <= set(other.ids)

    def union(self, other: "ModeSet") -> "ModeSet":
        return ModeSet.of(self.ids + other.ids)

    def difference(self, other: "ModeSet") -> "ModeSet":
        return ModeSet(tuple(i for i in self.ids if i not in other.ids))

    def intersection(self, other: "ModeSet") -> "ModeSet":
        return ModeSet(tuple(i for i in self.ids if i in other.ids))

    def complement(self, ambient: "ModeSet") -> "ModeSet":
        if not self.issubset(ambient):
            raise ValueError(f"{self.ids} is not contained in the ambient set {ambient.ids}")
        return ambient.difference(self)

    def position(self, j: int) -> int:
        return self.ids.index(j)

    def positions(self, sub: "ModeSet") -> list[int]:
        return [self.ids.index(j) for j in sub.ids]

    def subsets(self) -> Iterator["ModeSet"]:
        """All subsets, by increasing size."""
        for r in range(len(self) + 1):
            for c in itertools.combinations(self.ids, r):
                yield ModeSet(c)


@dataclass(frozen=True)
class MultiIndex:
    """Finitely supported map from mode ids to nonnegative integers."""

    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        items = sorted((int(j), int(a)) for j, a in self.entries if int(a) != 0)
        if any(a < 0 for _, a in items):
            raise ValueError("multi-index entries must be nonnegative")
        keys = [j for j, _ in items]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate mode id in multi-index")
        object.__setattr__(self, "entries", tuple(items))

    @classmethod
    def from_tuple(cls, modes: ModeSet, values: Sequence[int]) -> "MultiIndex":
        return cls(tuple(zip(modes.ids, values)))

    @classmethod
    def from_dict(cls, d: dict) -> "MultiIndex":
        return cls(tuple(d.items()))

    def __getitem__(self, j: int) -> int:
        return dict(self.entries).get(j, 0)

    @property
    def support(self) -> ModeSet:
        return ModeSet(tuple(j for j, _ in self.entries))

    @property
    def order(self) -> int:
        return sum(a for _, a in self.entries)

    @property
    def factorial(self) -> int:
        return math.prod(math.factorial(a) for _, a in self.entries)

    def as_tuple(self, modes: ModeSet) -> tuple[int, ...]:
        if not self.support.issubset(modes):
            raise ValueError("multi-index support exceeds the mode set")
        d = dict(self.entries)
        return tuple(d.get(j, 0) for j in modes.ids)


def _graded_tuples(n_modes: int, per_mode_cap: int, total_cap: int) -> list[tuple[int, ...]]:
    if n_modes == 0:
        return [()]
    cap = min(per_mode_cap, total_cap)
    out = [t for t in itertools.product(range(cap + 1), repeat=n_modes) if sum(t) <= total_cap]
    # graded; descending lexicographic inside a degree, so (1,0) precedes (0,1)
    out.sort(key=lambda t: (sum(t), tuple(-a for a in t)))
    return out


@dataclass(frozen=True)
class Truncation:
    """Finite set of multi-indices with per-mode and total-degree caps."""

    modes: ModeSet
    per_mode_cap: int
    total_degree_cap: int
    _tuples: tuple = field(init=False, repr=False, compare=False)
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.per_mode_cap < 0 or self.total_degree_cap < 0:
            raise ValueError("caps must be nonnegative")
        if not isinstance(self.modes, ModeSet):
            object.__setattr__(self, "modes", ModeSet.of(self.modes))
        tuples = tuple(_graded_tuples(len(self.modes), self.per_mode_cap, self.total_degree_cap))
        object.__setattr__(self, "_tuples", tuples)
        object.__setattr__(self, "_lookup", {t: k for k, t in enumerate(tuples)})

    @classmethod
    def simple(cls, n_modes: int, cap: int, total: int | None = None, first_mode: int = 0) -> "Truncation":
        modes = ModeSet(tuple(range(first_mode, first_mode + n_modes)))
        return cls(modes, cap, cap if total is None else total)

    @property
    def dim(self) -> int:
        return len(self._tuples)

    def __len__(self) -> int:
        return self.dim

    @property
    def tuples(self) -> tuple[tuple[int, ...], ...]:
        return self._tuples

    @property
    def array(self) -> np.ndarray:
        """Enumerated multi-indices as an integer array of shape (dim, n_modes)."""
        return np.array(self._tuples, dtype=int).reshape(self.dim, len(self.modes))

    def index(self, alpha) -> int:
        """Position of a multi-index (tuple or MultiIndex); -1 when outside the truncation."""
        if isinstance(alpha, MultiIndex):
            alpha = alpha.as_tuple(self.modes)
        return self._lookup.get(tuple(int(a) for a in alpha), -1)

    def __contains__(self, alpha) -> bool:
        return self.index(alpha) >= 0

    def padded(self, pad: int) -> "Truncation":
        return Truncation(self.modes, self.per_mode_cap + pad, self.total_degree_cap + pad)

    def embed_positions(self, smaller: "Truncation") -> np.ndarray:
        """Positions of the smaller truncation's indices inside this one."""
        if smaller.modes != self.modes:
            raise ValueError("truncations must share the mode set")
        pos = np.array([self.index(t) for t in smaller.tuples], dtype=int)
        if np.any(pos < 0):
            raise ValueError("truncation is not nested")
        return pos

    def shift_map(self, mode_pos: int, step: int) -> np.ndarray:
        """For each index alpha, the position of alpha + step*delta_j, or -1."""
        out = np.empty(self.dim, dtype=int)
        for k, t in enumerate(self._tuples):
            s = list(t)
            s[mode_pos] += step
            out[k] = self._lookup.get(tuple(s), -1) if s[mode_pos] >= 0 else -1
        return out

    def restrict_positions(self, sub: ModeSet) -> np.ndarray:
        """Column positions of a sub mode set inside the index array."""
        return np.array(self.modes.positions(sub), dtype=int)


def enumerate_multiindices(t: Truncation) -> list[MultiIndex]:
    """Graded-lex enumeration; the zero multi-index comes first."""
    return [MultiIndex.from_tuple(t.modes, a) for a in t.tuples]


@dataclass(frozen=True)
class IndexFamilies:
    """The derivative index families over a mode set E.

    ``full()`` is I_m(E): pairs (alpha, beta) with 0 <= alpha_j, beta_j <= m.
    ``tilde2()`` keeps pairs of I_2 with alpha_j + beta_j >= 1 for every j,
    ``tilde4()`` pairs of I_4 with alpha_j + beta_j >= 2.
    """

    E: ModeSet
    m: int

    def _pairs(self, m: int, lower: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
        n = len(self.E)
        per_mode = [(a, b) for a in range(m + 1) for b in range(m + 1) if a + b >= lower]
        for combo in itertools.product(per_mode, repeat=n):
            yield tuple(c[0] for c in combo), tuple(c[1] for c in combo)

    def full(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        return list(self._pairs(self.m, 0))

    def tilde2(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        return list(self._pairs(2, 1))

    def tilde4(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        return list(self._pairs(4, 2))


def index_families(E: ModeSet, m: int) -> IndexFamilies:
    if m not in (1, 2, 4):
        raise ValueError(f"unsupported derivative order m={m}; expected 1, 2 or 4")
    return IndexFamilies(E, m)
