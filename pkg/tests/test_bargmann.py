import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockweyl import bargmann as bg
from fockweyl.core_index import ModeSet, Truncation
from fockweyl.fock import FockVector, PhasePoint
from fockweyl.selftest import bargmann_suite, transform_residual


def test_transform_of_constant_is_constant():
    t = Truncation.simple(1, 3)
    X = PhasePoint([0.4], [-0.9])
    assert bg.kree_raczka_transform(FockVector.vacuum(t), X, 0.8) == pytest.approx(1.0, abs=1e-12)
    F = bg.bargmann_transform(FockVector.vacuum(t), 0.8)
    assert F(X.x, X.xi) == pytest.approx(1.0)


@pytest.mark.parametrize("h", [0.5, 1.0])
def test_transform_P_to_Q(h, rng):
    X = (rng.uniform(-1, 1, (10, 1)), rng.uniform(-1, 1, (10, 1)))
    for a in range(6):
        assert transform_residual((a,), h, X) < 1e-7
    X2 = (rng.uniform(-1, 1, (10, 2)), rng.uniform(-1, 1, (10, 2)))
    assert transform_residual((2, 1), h, X2) < 1e-7


def test_transform_is_isometric(rng):
    t = Truncation.simple(2, 3)
    f = FockVector(t, rng.normal(size=t.dim) + 1j * rng.normal(size=t.dim))
    assert bg.bargmann_transform(f, 0.6).norm() == pytest.approx(f.norm())


def test_reproducing_examples(rng):
    t = Truncation.simple(1, 4)
    one = bg.SBFunction.basis(t, (0,), 1.0)
    assert bg.reproducing_eval(one, PhasePoint([0.0], [0.0])) == 1
    X = (rng.uniform(-1, 1, (5, 1)), rng.uniform(-1, 1, (5, 1)))
    for a in range(5):
        F = bg.SBFunction.basis(t, (a,), 1.0)
        q = bg.q_values(t, *X, 1.0)[a]
        assert np.max(np.abs(bg.reproducing_eval(F, X, "kernel") - q)) < 1e-7
    F = bg.SBFunction(t, rng.normal(size=t.dim), 1.0)
    G = bg.SBFunction(t, rng.normal(size=t.dim), 1.0)
    FG = bg.SBFunction(t, 2 * F.coeffs - 3j * G.coeffs, 1.0)
    lin = 2 * bg.reproducing_eval(F, X, "kernel") - 3j * bg.reproducing_eval(G, X, "kernel")
    assert np.allclose(bg.reproducing_eval(FG, X, "kernel"), lin, atol=1e-10)


@given(st.integers(0, 4), st.floats(-1, 1), st.floats(-1, 1), st.sampled_from([0.5, 1.0]))
def test_reproducing_routes_agree(a, x, xi, h):
    t = Truncation.simple(1, 4)
    F = bg.SBFunction.basis(t, (a,), h)
    X = (np.array([[x]]), np.array([[xi]]))
    r = [bg.reproducing_eval(F, X, route) for route in ("basis", "kernel", "shifted")]
    assert abs(r[0] - r[1])[0] < 1e-6 and abs(r[0] - r[2])[0] < 1e-6 and abs(r[1] - r[2])[0] < 1e-6


def test_kree_raczka_examples(rng):
    t = Truncation.simple(1, 3)
    X = (rng.uniform(-1, 1, (4, 1)), rng.uniform(-1, 1, (4, 1)))
    assert np.allclose(bg.kree_raczka_transform((lambda u: np.ones(len(u)), 1), X, 0.7), 1, atol=1e-12)
    for a in range(4):
        f = FockVector.basis(t, (a,))
        assert np.max(np.abs(bg.kree_raczka_transform(f, X, 0.7) - bg.q_values(t, *X, 0.7)[a])) < 1e-6
    f = FockVector(t, rng.normal(size=t.dim))
    f2 = FockVector(t, 2 * f.coeffs)
    assert np.allclose(bg.kree_raczka_transform(f2, X, 0.7), 2 * bg.kree_raczka_transform(f, X, 0.7))


def test_shift_identity_examples(rng):
    t = Truncation.simple(1, 3)
    F = bg.SBFunction(t, rng.normal(size=t.dim), 1.0)
    assert bg.shift_identity_residual(F, F, [0.0], [0.0]) == 0
    Q1 = bg.SBFunction.basis(t, (1,), 1.0)
    assert bg.shift_identity_residual(Q1, Q1, [0.3], [-0.2], 1.0) < 1e-7
    one = bg.SBFunction.basis(t, (0,), 1.0)
    a, b = rng.uniform(-0.5, 0.5, 2)
    assert bg.shift_identity_residual(one, one, [a], [b], 1.0) < 1e-8


def test_frame_norm_examples(rng):
    t = Truncation.simple(2, 3)
    for E in (ModeSet((0,)), ModeSet((1,)), ModeSet((0, 1))):
        assert bg.frame_norm(FockVector.vacuum(t), E, 1.0).value == pytest.approx(1.0, abs=1e-6)
    for alpha in [(1, 0), (2, 1), (0, 3)]:
        assert bg.frame_norm(FockVector.basis(t, alpha), ModeSet((0,)), 0.5).value == pytest.approx(1.0, abs=1e-5)
    v = FockVector(t, rng.normal(size=t.dim) + 1j * rng.normal(size=t.dim))
    n1 = bg.frame_norm(v, ModeSet((1,)), 1.0).value
    n2 = bg.frame_norm(FockVector(t, 2 * v.coeffs), ModeSet((1,)), 1.0).value
    assert n2 == pytest.approx(2 * n1)
    assert n1 == pytest.approx(v.norm(), rel=1e-5)
    assert bg.frame_norm(v, ModeSet((0, 1)), 1.0).value == pytest.approx(
        v.norm(), rel=1e-5)


def test_bargmann_suite():
    checks = bargmann_suite()
    assert all(c.passed for c in checks), checks
