"""Truncated multivariate Taylor arithmetic for exact mixed partial derivatives.

A Jet over k variables with per-variable degree m stores Taylor coefficients
c[..., g_1, ..., g_k] = d^g f / g! at a batch of base points.  Products are truncated
per variable, which is exactly what is needed for the derivative families I_m.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


class Jet:
    __array_priority__ = 100

    def __init__(self, coeffs: np.ndarray, k: int, m: int):
        self.c = np.asarray(coeffs)
        self.k = k
        self.m = m

    @classmethod
    def variable(cls, values, index: int, k: int, m: int) -> "Jet":
        values = np.asarray(values, dtype=float)
        c = np.zeros(values.shape + (m + 1,) * k, dtype=float)
        c[(Ellipsis,) + (0,) * k] = values
        if m >= 1:
            e = [0] * k
            e[index] = 1
            c[(Ellipsis,) + tuple(e)] = 1.0
        return cls(c, k, m)

    @classmethod
    def constant_like(cls, other: "Jet", value) -> "Jet":
        c = np.zeros(other.c.shape, dtype=np.result_type(other.c, value))
        c[(Ellipsis,) + (0,) * other.k] = value
        return cls(c, other.k, other.m)

    @property
    def value(self) -> np.ndarray:
        return self.c[(Ellipsis,) + (0,) * self.k]

    def derivative(self, gamma) -> np.ndarray:
        gamma = tuple(int(g) for g in gamma)
        if any(g > self.m for g in gamma):
            raise ValueError("derivative order exceeds the jet degree")
        return self.c[(Ellipsis,) + gamma] * math.prod(math.factorial(g) for g in gamma)

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant_like(self, other)

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.c + other.c, self.k, self.m)
        out = self.c.astype(np.result_type(self.c, other), copy=True)
        out[(Ellipsis,) + (0,) * self.k] += other
        return Jet(out, self.k, self.m)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.k, self.m)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other, self.k, self.m)
        return Jet(_truncated_product(self.c, other.c, self.k, self.m), self.k, self.m)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.c / other, self.k, self.m)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n: int):
        if int(n) != n or n < 0:
            raise ValueError("only nonnegative integer powers are supported")
        out = Jet.constant_like(self, 1.0)
        for _ in range(int(n)):
            out = out * self
        return out

    def _split(self):
        a0 = self.value
        s = self.c.copy()
        s[(Ellipsis,) + (0,) * self.k] = 0
        return a0, Jet(s, self.k, self.m)

    def _series(self, coeffs_of_s) -> "Jet":
        # sum_n a_n s^n with s nilpotent of order k*m + 1
        a0, s = self._split()
        top = self.k * self.m
        terms = coeffs_of_s(a0, top)
        out = Jet.constant_like(self, 0.0)
        out = Jet(out.c.astype(np.result_type(out.c, *[np.asarray(t) for t in terms])), self.k, self.m)
        power = Jet.constant_like(self, 1.0)
        for n, an in enumerate(terms):
            if n > 0:
                power = power * s
            out = out + Jet(_bcast(an, power.c, self.k) * power.c, self.k, self.m)
        return out

    def exp(self) -> "Jet":
        return self._series(lambda a0, top: [np.exp(a0) / math.factorial(n) for n in range(top + 1)])

    def cos(self) -> "Jet":
        def coeffs(a0, top):
            derivs = [np.cos(a0), -np.sin(a0), -np.cos(a0), np.sin(a0)]
            return [derivs[n % 4] / math.factorial(n) for n in range(top + 1)]
        return self._series(coeffs)

    def sin(self) -> "Jet":
        def coeffs(a0, top):
            derivs = [np.sin(a0), np.cos(a0), -np.sin(a0), -np.cos(a0)]
            return [derivs[n % 4] / math.factorial(n) for n in range(top + 1)]
        return self._series(coeffs)

    def reciprocal(self) -> "Jet":
        return self._series(lambda a0, top: [(-1) ** n / a0 ** (n + 1) for n in range(top + 1)])

    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__":
            return NotImplemented
        unary = {np.exp: Jet.exp, np.cos: Jet.cos, np.sin: Jet.sin, np.negative: Jet.__neg__,
                 np.reciprocal: Jet.reciprocal}
        if ufunc in unary and len(inputs) == 1:
            return unary[ufunc](inputs[0])
        if ufunc is np.square:
            return inputs[0] * inputs[0]
        binary = {np.add: lambda a, b: a + b, np.subtract: lambda a, b: a - b,
                  np.multiply: lambda a, b: a * b, np.true_divide: lambda a, b: a / b}
        if ufunc in binary and len(inputs) == 2:
            a, b = inputs
            if not isinstance(a, Jet):
                a = b._lift(a)
            return binary[ufunc](a, b)
        return NotImplemented


def _bcast(a, c, k):
    a = np.asarray(a)
    return a.reshape(a.shape + (1,) * k)


def _truncated_product(a: np.ndarray, b: np.ndarray, k: int, m: int) -> np.ndarray:
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
    lead = (Ellipsis,)
    for g in itertools.product(range(m + 1), repeat=k):
        ag = a[lead + g]
        if not np.any(ag):
            continue
        src = lead + tuple(slice(0, m + 1 - gi) for gi in g)
        dst = lead + tuple(slice(gi, m + 1) for gi in g)
        out[dst] += _bcast(ag, b, k) * b[src]
    return out


def variables(points: np.ndarray, m: int) -> list[Jet]:
    """One jet per coordinate of points (npts, k)."""
    points = np.atleast_2d(points)
    k = points.shape[1]
    return [Jet.variable(points[:, i], i, k, m) for i in range(k)]
