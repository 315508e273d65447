import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fockweyl.bounds import (CV, RhoDeltaCert, SymbolClassCert, certify_symbol, cv_bound, diff_bound,
                             freeze_complement, kernel_decay_check, operator_norm_lower, p_integral,
                             paper_constants_selftest, schur_integral, telescoped_term_bound, trig_cert)
from fockweyl.core_index import ModeSet, Truncation
from fockweyl.quantize import NonConvergence, QuantizationConfig, constant_symbol, trig_atom, weyl_matrix
from fockweyl.symbols import cosine_symbol, lattice_gaussian, random_trig

M1, M2 = ModeSet((0,)), ModeSet((0, 1))


def test_cv_constant():
    assert CV == 225 * math.pi


def test_cv_bound_examples():
    assert cv_bound(SymbolClassCert.uniform(M2, 2.0, 0.0), 0.5) == 2.0
    assert cv_bound(SymbolClassCert.uniform(M1, 1.0, 1.0), 1.0) == pytest.approx(1 + 225 * math.pi)
    assert cv_bound(SymbolClassCert.uniform(M1, 1.0, 1.0), 1.0) == pytest.approx(707.8583, abs=1e-4)
    rd = RhoDeltaCert(1.5, {0: 0.5, 1: 0.2}, {0: 0.4, 1: 1.0})
    expected = 1.5 * (1 + CV * 0.25 * 0.2) * (1 + CV * 0.25 * 0.2)
    assert cv_bound(rd, 0.25) == pytest.approx(expected)


def test_cv_bound_order_four():
    c = SymbolClassCert.uniform(M1, 1.0, 0.5, order=4)
    assert cv_bound(c, 0.25) == pytest.approx(1 + CV * 0.25 * 0.25)
    big = SymbolClassCert.uniform(M1, 1.0, 2.0, order=4)
    assert big.K == 64
    assert cv_bound(big, 1.0) == pytest.approx(1 + CV * 64 * 4)


def test_diff_bound_examples():
    c = SymbolClassCert.uniform(M1, 1.0, 0.1)
    E0 = ModeSet(())
    assert diff_bound(c, M1, M1, 1.0) == 0
    a = CV * 0.1
    assert diff_bound(c, E0, M1, 1.0) == pytest.approx(a * (1 + a))
    assert diff_bound(c, E0, M1, 1.0) == pytest.approx(5067.17, abs=0.01)
    assert diff_bound(c, E0, M1, 1.0, order=4) == pytest.approx(CV * 0.01 * (1 + CV * 0.01))
    with pytest.raises(ValueError):
        diff_bound(SymbolClassCert.uniform(M2, 1.0, 0.1), ModeSet((1,)), ModeSet((0,)), 1.0)


def test_bounds_reject_bad_h():
    c = SymbolClassCert.uniform(M1, 1.0, 0.1)
    for h in (0.0, 1.2):
        with pytest.raises(ValueError):
            cv_bound(c, h)


@given(st.floats(0.01, 1.0), st.lists(st.floats(0, 2), min_size=3, max_size=3), st.sampled_from([2, 4]))
def test_bound_algebra(h, eps, order):
    modes = ModeSet((0, 1, 2))
    c = SymbolClassCert(1.3, dict(zip(modes.ids, eps)), order)
    full = cv_bound(c, h)
    assert full >= c.M
    subsets = list(modes.subsets())
    for S in subsets:
        assert cv_bound(c, h, S) <= full * (1 + 1e-12)
    # the telescoped terms over E inside Lam sum to the product bound
    assert sum(telescoped_term_bound(c, E, h) for E in subsets) == pytest.approx(full, rel=1e-12)
    # differences telescope against the product bound
    for S in subsets:
        assert diff_bound(c, S, modes, h) >= full - cv_bound(c, h, S) - 1e-9 * full


def test_operator_norm_examples(rng):
    assert operator_norm_lower(np.eye(5)) == pytest.approx(1.0, abs=1e-12)
    assert operator_norm_lower(np.diag([3.0, 1.0, 0.5])) == pytest.approx(3.0, abs=1e-12)
    assert operator_norm_lower(np.zeros((4, 4))) == 0
    for _ in range(5):
        A = rng.normal(size=(50, 50)) + 1j * rng.normal(size=(50, 50))
        assert operator_norm_lower(A) == pytest.approx(np.linalg.svd(A, compute_uv=False)[0], rel=1e-8)


def test_operator_norm_close_singular_values(rng):
    Q1, _ = np.linalg.qr(rng.normal(size=(30, 30)))
    Q2, _ = np.linalg.qr(rng.normal(size=(30, 30)))
    s = np.linspace(0.1, 1.0, 30)
    s[-1], s[-2] = 1.69693, 1.69690
    A = Q1 @ np.diag(s) @ Q2
    assert operator_norm_lower(A) == pytest.approx(1.69693, rel=1e-8)


def test_operator_norm_nonconvergence(rng):
    A = rng.normal(size=(20, 20))
    with pytest.raises(NonConvergence):
        operator_norm_lower(A, tol=1e-300, max_iter=2, block=1)


def test_norm_monotone_in_caps(rng):
    symbols = [cosine_symbol(M1, 0.8, 0.5)[0], random_trig(M1, 3, rng)[0],
               lattice_gaussian(1, [0], [1.0], 0.0).symbol]
    for F in symbols:
        norms = [operator_norm_lower(weyl_matrix(F, QuantizationConfig(0.5, Truncation(M1, cap, cap))))
                 for cap in (6, 8, 10, 12)]
        assert all(b >= a - 1e-9 for a, b in zip(norms, norms[1:]))


def test_trig_certification(rng):
    atom = trig_atom(M2, [0.7, -1.3], [0.4, 0.2], 0.8 - 0.3j)
    c = trig_cert(atom)
    assert c.M == pytest.approx(abs(0.8 - 0.3j))
    assert c.eps == {0: 0.7, 1: 1.3}
    assert certify_symbol(atom, c).passed
    F, _ = random_trig(M2, 4, rng)
    assert certify_symbol(F, trig_cert(F)).passed
    assert certify_symbol(F, trig_cert(F, order=4)).passed
    too_small = SymbolClassCert(trig_cert(F).M, {0: 0.01, 1: 0.01})
    assert not certify_symbol(F, too_small).passed


def test_constant_certified_with_any_eps():
    one = constant_symbol(M2, 2.0)
    assert certify_symbol(one, SymbolClassCert.uniform(M2, 2.0, 1e-6)).passed
    assert certify_symbol(one, SymbolClassCert.uniform(M2, 2.0, 1e-6, order=4)).max_ratio == pytest.approx(1.0)


def test_lattice_gaussian_fitted_cert():
    L = lattice_gaussian(1, [0, 1, 2], [1.0, 0.5, 0.25], 0.3)
    c = L.suggested_cert(2)
    assert certify_symbol(L.symbol, c, seed=3).passed
    assert c.eps[1] / c.eps[0] == pytest.approx(0.5)


def test_freeze_complement(rng):
    F, _ = random_trig(M2, 2, rng)
    G = freeze_complement(F, ModeSet((0,)), [0.3], [-0.2])
    x, xi = rng.normal(size=(5, 1)), rng.normal(size=(5, 1))
    full = F.evaluate(np.hstack([x, np.full((5, 1), 0.3)]), np.hstack([xi, np.full((5, 1), -0.2)]))
    assert np.allclose(G.evaluate(x, xi), full)


def test_kernel_decay_constant_is_zero():
    rep = kernel_decay_check(constant_symbol(M1, 1.0), SymbolClassCert.uniform(M1, 1.0, 0.5), M1, 0.5)
    assert rep.max_ratio == 0


@pytest.mark.parametrize("h", [0.25, 0.5, 1.0])
def test_kernel_decay_trig(h, rng):
    F, c = random_trig(M2, 3, np.random.default_rng(5))
    rep = kernel_decay_check(F, c, ModeSet((0,)), h, n_pairs=50, seed=1)
    assert len(rep.ratios) == 50
    assert rep.max_ratio <= 1


def test_kernel_decay_ratio_stable_in_h():
    F, c = cosine_symbol(M1, 0.9, 0.6)
    r = [kernel_decay_check(F, c, M1, h, n_pairs=50, seed=2).max_ratio for h in (0.25, 0.5, 1.0)]
    assert max(r) <= 1
    assert max(r) / min(r) < 20


def test_constants():
    assert schur_integral() == pytest.approx(math.sqrt(math.pi / 2), abs=1e-10)
    assert p_integral(1) == pytest.approx(4 / math.sqrt(math.pi), abs=1e-10)
    assert p_integral(2) == pytest.approx(1.0, abs=1e-10)
    assert p_integral(0) <= 5
    rep = paper_constants_selftest()
    assert rep.passed and rep.C == 25
