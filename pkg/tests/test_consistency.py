import numpy as np
from scipy import stats

from bsptree.consistency import run_consistency, two_sample_count_test
from bsptree.geometry import ConvexPolygon
from bsptree.measure import AxisAligned, Uniform
from bsptree.rng import RngStream

DOM = ConvexPolygon.unit_square()
SUB = ConvexPolygon.rectangle(0.2, 0.3, 0.7, 0.8)


def test_count_test_accepts_same_distribution():
    gen = np.random.default_rng(0)
    a = gen.poisson(4.0, size=3000)
    b = gen.poisson(4.0, size=3000)
    assert two_sample_count_test(a, b) > 0.01


def test_count_test_rejects_shifted_distribution():
    gen = np.random.default_rng(1)
    a = gen.poisson(4.0, size=3000)
    b = gen.poisson(6.0, size=3000)
    assert two_sample_count_test(a, b) < 1e-6


def test_count_test_degenerate_single_bin():
    assert two_sample_count_test([2] * 50, [2] * 50) == 1.0


def test_count_test_calibration():
    # under the null the p-value should be roughly uniform
    gen = np.random.default_rng(2)
    ps = [
        two_sample_count_test(gen.poisson(3.0, 800), gen.poisson(3.0, 800))
        for _ in range(60)
    ]
    assert stats.kstest(ps, "uniform").pvalue > 0.001


def test_restrict_matches_direct_uniform():
    rep = run_consistency(DOM, SUB, Uniform(), 2.0, 800, RngStream(10))
    assert rep["passed"]


def test_restrict_matches_direct_axis():
    rep = run_consistency(DOM, SUB, AxisAligned(), 3.0, 800, RngStream(11))
    assert rep["passed"]


def test_broken_restriction_is_rejected():
    rep = run_consistency(DOM, SUB, Uniform(), 2.0, 800, RngStream(12), broken=True)
    assert not rep["passed"]
    assert rep["leaf_count_chi2_p"] < 1e-6
