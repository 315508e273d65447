import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from fockweyl.bargmann import q_values
from fockweyl.core_index import ModeSet, Truncation
from fockweyl.gaussmeasure import (GaussianMeasureSpec, NonFiniteEvaluation, RngStream, WeightSequence,
                                   cameron_martin_divergence_probe, ell_a, exp_ell, mc_integrate, sample,
                                   tail_integral, tail_summability_report)
from fockweyl.selftest import measure_suite


def test_tail_integral_value():
    assert tail_integral(2.0) == pytest.approx(0.0570261, rel=1e-5)


def test_power_law_summability():
    w = WeightSequence.power_law(1.0, 50)
    rep = tail_summability_report(w, 1.0, 50)
    assert rep.verdict == "summable"
    assert rep.bound_respected
    j10 = int(np.flatnonzero(w.values == 11.0)[0])
    assert rep.terms[j10] < math.sqrt(2) * math.exp(-121 / 4)
    assert np.all(np.diff(rep.partial_sums) >= 0)


def test_constant_weights_not_summable():
    rep = tail_summability_report(WeightSequence.constant(1.0, 50), 1.0)
    assert np.allclose(rep.terms, tail_integral(1.0))
    assert rep.verdict == "not summable"


def test_sampling_variances():
    n = 100_000
    for kind, var in (("K", 0.5), ("phi", 1.0)):
        pts = sample(GaussianMeasureSpec(ModeSet.range(2), 1.0, kind), RngStream(4, 1), n)
        for j in range(pts.shape[1]):
            v = pts[:, j] ** 2
            assert abs(v.mean() - var) < 3 * v.std() / math.sqrt(n)
        c = pts[:, 0] * pts[:, 1]
        assert abs(c.mean()) < 3 * c.std() / math.sqrt(n)


def test_streams_reproducible():
    spec = GaussianMeasureSpec(ModeSet.range(3), 0.5, "phi")
    a = sample(spec, RngStream(9, 2), 1000)
    b = sample(spec, RngStream(9, 2), 1000)
    c = sample(spec, RngStream(9, 3), 1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_factorization_ks():
    n = 10_000
    joint = sample(GaussianMeasureSpec(ModeSet.range(3), 1.0, "K"), RngStream(1, 1), n)
    first = sample(GaussianMeasureSpec(ModeSet((0,)), 1.0, "K"), RngStream(1, 2), n)
    rest = sample(GaussianMeasureSpec(ModeSet((1, 2)), 1.0, "K"), RngStream(1, 3), n)
    crit = 1.63 * math.sqrt(2 / n)  # 1% two-sample critical value
    assert stats.ks_2samp(joint[:, 0], first[:, 0]).statistic < crit
    for j in (1, 2):
        assert stats.ks_2samp(joint[:, j], rest[:, j - 1]).statistic < crit


def test_ell_functions():
    x = np.array([[0.3, -1.2, 2.0]])
    assert ell_a([0, 1, 0], x)[0] == -1.2
    assert exp_ell([0, 1, 0], x)[0] == pytest.approx(math.exp(-1.2))


def test_mc_examples():
    spec = GaussianMeasureSpec(ModeSet.range(2), 1.0, "K")
    one = mc_integrate(lambda u: np.ones(len(u)), spec, RngStream(0, 1), 1000)
    assert one.mean == 1 and one.stderr == 0
    sq = mc_integrate(lambda u: u[:, 0] ** 2, spec, RngStream(0, 2), 100_000)
    assert sq.within(0.5)
    phi = GaussianMeasureSpec(ModeSet.range(2), 1.0, "phi")
    t = Truncation(ModeSet.range(2), 2, 2)
    k = t.index((1, 1))
    est = mc_integrate(lambda p: np.abs(q_values(t, p[:, :2], p[:, 2:], 1.0)[k]) ** 2, phi, RngStream(0, 3), 100_000)
    assert est.within(1.0)


def test_mc_rejects_non_finite():
    spec = GaussianMeasureSpec(ModeSet.range(1), 1.0, "K")
    with pytest.raises(NonFiniteEvaluation):
        mc_integrate(lambda u: np.where(u[:, 0] > 0, np.inf, 0.0), spec, RngStream(0, 1), 100)


def test_divergence_probe_examples():
    p = cameron_martin_divergence_probe(1.0, [10, 40], RngStream(3, 5), 10_000)
    assert p.medians[0] == pytest.approx(0.5 * stats.chi2.median(10), rel=0.03)
    assert 3 <= p.medians[1] / p.medians[0] <= 5
    with pytest.raises(ValueError):
        cameron_martin_divergence_probe(0.0, [10, 40], RngStream(3, 5))


def test_measure_suite_passes():
    checks = measure_suite(seed=0, n_samples=100_000)
    assert all(c.passed for c in checks), [c for c in checks if not c.passed]


@given(st.floats(0.05, 1.0), st.sampled_from(["K", "phi"]))
def test_density_normalized(h, kind):
    spec = GaussianMeasureSpec(ModeSet.range(1), h, kind)
    s = math.sqrt(spec.variance)
    grid = np.linspace(-10 * s, 10 * s, 4001)
    if kind == "K":
        dens = spec.density(grid[:, None])
        total = np.trapezoid(dens, grid)
    else:
        X, Y = np.meshgrid(grid[::20], grid[::20])
        dens = spec.density(np.stack([X.ravel(), Y.ravel()], axis=1)).reshape(X.shape)
        total = np.trapezoid(np.trapezoid(dens, grid[::20]), grid[::20])
    assert total == pytest.approx(1.0, rel=1e-3)
