import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockweyl.hermite import (BasisFunctionSpec, adaptive_order, basis_eval, gauss_hermite_rule, hermite_binomial_check,
                              hermite_eval, hermite_norm_sq, hermite_table, normalized_hermite_table)
from fockweyl.selftest import gram_deviation


def test_hermite_values():
    assert hermite_eval(0, 0.7) == 1
    assert hermite_eval(2, 2.0) == pytest.approx(3.0, abs=1e-15)
    assert hermite_eval(3, 1.0) == pytest.approx(-2.0, abs=1e-15)


def test_hermite_norms():
    assert hermite_norm_sq(0) == 1
    assert hermite_norm_sq(3) == 6
    r = gauss_hermite_rule(64)
    # standard normal via x = sqrt(2) t
    val = np.sum(r.weights * hermite_eval(5, math.sqrt(2) * r.nodes) ** 2) / math.sqrt(math.pi)
    assert abs(val - 120) < 1e-9


def test_rule_small_orders():
    r1 = gauss_hermite_rule(1)
    assert r1.nodes[0] == pytest.approx(0.0, abs=1e-15)
    assert r1.weights[0] == pytest.approx(math.sqrt(math.pi))
    r2 = gauss_hermite_rule(2)
    assert np.allclose(np.sort(r2.nodes), [-1 / math.sqrt(2), 1 / math.sqrt(2)])
    assert np.allclose(r2.weights, math.sqrt(math.pi) / 2)
    r3 = gauss_hermite_rule(3)
    assert r3.integrate(lambda x: x ** 4) == pytest.approx(0.75 * math.sqrt(math.pi), rel=1e-14)


def test_orthogonality_up_to_15():
    r = gauss_hermite_rule(64)
    x = math.sqrt(2) * r.nodes
    H = hermite_table(15, x)
    G = (H * r.weights) @ H.T / math.sqrt(math.pi)
    expected = np.diag([math.factorial(n) for n in range(16)]).astype(float)
    assert np.max(np.abs(G - expected) / np.maximum(1, expected.max(axis=1, keepdims=True))) < 1e-9
    assert np.max(np.abs(G - expected)[:10, :10]) < 1e-9


def test_normalized_table_matches_plain():
    x = np.linspace(-3, 3, 11)
    N = normalized_hermite_table(8, x)
    H = hermite_table(8, x)
    for n in range(9):
        assert np.allclose(N[n], H[n] / math.sqrt(math.factorial(n)))


@pytest.mark.parametrize("n_modes", [1, 2])
@pytest.mark.parametrize("h", [0.5, 1.0])
@pytest.mark.parametrize("kind", ["K", "phi"])
def test_basis_orthonormal(n_modes, h, kind):
    assert gram_deviation(n_modes, h, 6, kind) < 1e-8


def test_basis_eval_examples():
    assert basis_eval(BasisFunctionSpec((0, 0), 0.7, "Q"), ([0.3, 1.0], [0.2, -1.0])) == 1
    assert basis_eval(BasisFunctionSpec((0,), 0.7, "P_K"), [0.4]) == 1
    assert basis_eval(BasisFunctionSpec((1,), 0.5, "Q"), ([0.8], [-0.3])) == pytest.approx(0.8 + 0.3j)
    assert basis_eval(BasisFunctionSpec((1,), 2.0, "P_K"), [1.3]).real == pytest.approx(1.3)
    with pytest.raises(ValueError):
        BasisFunctionSpec((1,), 1.0, "P_phi")


def test_binomial_check_examples(rng):
    assert hermite_binomial_check(1, rng.normal(size=(20, 2))) == 0
    assert hermite_binomial_check(2, [[1.0, 1.0]]) < 1e-12
    assert (1 - 1j) ** 2 == -2j
    assert hermite_binomial_check(6, rng.normal(size=(100, 2))) < 1e-9


@given(st.integers(0, 6), st.floats(-2, 2), st.floats(-2, 2))
def test_binomial_identity_property(m, x, xi):
    assert hermite_binomial_check(m, [[x, xi]]) < 1e-9 * max(1.0, (abs(x) + abs(xi)) ** m)


@given(st.integers(1, 12), st.floats(-4, 4))
def test_three_term_recurrence(n, x):
    lhs = hermite_eval(n + 1, x)
    rhs = x * hermite_eval(n, x) - n * hermite_eval(n - 1, x)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_adaptive_order_converges():
    res = adaptive_order(lambda n: gauss_hermite_rule(n).integrate(np.cos), start=8, max_order=64)
    assert res.converged
    assert res.value == pytest.approx(math.sqrt(math.pi) * math.exp(-0.25), rel=1e-12)
