import math

import numpy as np
import pytest
from scipy import integrate, stats

from bsptree.errors import EnvelopeViolation, QuadratureFailure
from bsptree.geometry import ConvexPolygon, perimeter, project
from bsptree.measure import (
    AxisAligned,
    Custom,
    Mixed,
    Uniform,
    adaptive_simpson,
    block_measure,
    direction_density,
    integrate_over_directions,
    mondrian_style,
    projection_kinks,
    projection_length,
    sample_cut,
    sample_direction,
    weight_from_json,
)
from bsptree.rng import RngStream
from conftest import random_convex_polygon

PI = math.pi


# --------------------------------------------------------------------------
# quadrature


def test_adaptive_simpson_against_scipy():
    cases = [
        (lambda t: math.sin(t) ** 2 + 0.3 * t, 0.0, PI),
        (lambda t: math.exp(-t) * math.cos(5 * t), 0.0, 2.0),
        (lambda t: abs(t - 1.0), 0.0, 3.0),
    ]
    for f, a, b in cases:
        ref, _ = integrate.quad(f, a, b, limit=200)
        assert adaptive_simpson(f, a, b) == pytest.approx(ref, rel=1e-8)


def test_quadrature_failure_on_pathological_integrand():
    # a discontinuity engineered to defeat the refinement criterion
    def nasty(t):
        return 0.0 if t < 1.0 / 3.0 else 1e8 * math.sin(1e6 * t)

    with pytest.raises(QuadratureFailure):
        adaptive_simpson(nasty, 0.0, 1.0, rel_tol=1e-14)


def test_unit_weight_integral_equals_perimeter():
    # integral of |l(theta)| over (0, pi] recovers the perimeter
    gen = np.random.default_rng(3)
    for _ in range(25):
        p = random_convex_polygon(gen)
        val = integrate_over_directions(p, lambda t: projection_length(p, t))
        assert val == pytest.approx(perimeter(p), rel=1e-9)


# --------------------------------------------------------------------------
# block measure


def test_uniform_measure_is_perimeter():
    gen = np.random.default_rng(4)
    for _ in range(10):
        p = random_convex_polygon(gen)
        assert block_measure(p, Uniform()) == pytest.approx(perimeter(p), rel=1e-12)


def test_axis_measure_unit_square():
    sq = ConvexPolygon.unit_square()
    assert block_measure(sq, AxisAligned()) == pytest.approx(2.0, abs=1e-12)
    rect = ConvexPolygon.rectangle(0, 0, 3, 2)
    assert block_measure(rect, AxisAligned()) == pytest.approx(5.0, abs=1e-12)


def test_custom_measure_matches_uniform():
    sq = ConvexPolygon.unit_square()
    w = Custom(fn=lambda t: 1.0, sup=1.0)
    assert block_measure(sq, w) == pytest.approx(4.0, rel=1e-9)


def test_mixed_measure_is_weighted_sum():
    sq = ConvexPolygon.unit_square()
    w = mondrian_style(c_axis=2.0, c_uniform=0.5)
    assert block_measure(sq, w) == pytest.approx(2.0 * 2.0 + 0.5 * 4.0, rel=1e-12)


def test_mixed_validation():
    with pytest.raises(ValueError):
        Mixed([(Uniform(), 1.0)])  # needs two components
    with pytest.raises(ValueError):
        Mixed([(Uniform(), 0.0), (AxisAligned(), 0.0)])
    with pytest.raises(ValueError):
        Mixed([(Uniform(), -1.0), (AxisAligned(), 1.0)])


def test_weight_json_round_trips():
    for w in [Uniform(), AxisAligned(), mondrian_style(1.5, 0.5)]:
        back = weight_from_json(w.to_json())
        sq = ConvexPolygon.unit_square()
        assert block_measure(sq, back) == pytest.approx(block_measure(sq, w))


# --------------------------------------------------------------------------
# direction density


def test_uniform_density_unit_square_closed_form():
    sq = ConvexPolygon.unit_square()
    for t in np.linspace(0.05, PI, 37):
        want = (abs(math.cos(t)) + abs(math.sin(t))) / 4.0
        assert direction_density(sq, Uniform(), float(t)) == pytest.approx(
            want, abs=1e-12
        )


def test_axis_density_two_atoms():
    sq = ConvexPolygon.unit_square()
    assert direction_density(sq, AxisAligned(), PI / 2) == pytest.approx(0.5, abs=1e-12)
    assert direction_density(sq, AxisAligned(), PI) == pytest.approx(0.5, abs=1e-12)
    assert direction_density(sq, AxisAligned(), 1.0) == 0.0


def test_density_normalizes():
    gen = np.random.default_rng(5)
    p = random_convex_polygon(gen)
    total, _ = integrate.quad(
        lambda t: direction_density(p, Uniform(), t),
        1e-9,
        PI,
        limit=200,
        points=sorted(projection_kinks(p)),
    )
    assert total == pytest.approx(1.0, rel=1e-6)


def test_mixed_density_combines_atoms_and_continuum():
    sq = ConvexPolygon.unit_square()
    w = mondrian_style(1.0, 1.0)  # total measure 2 + 4 = 6
    # atom at pi/2 carries mass |l|/total = 1/6
    assert direction_density(sq, w, PI / 2) == pytest.approx(1.0 / 6.0, rel=1e-9)
    # continuous part is the uniform-component density scaled by 4/6
    t = 0.8
    want = (4.0 / 6.0) * (abs(math.cos(t)) + abs(math.sin(t))) / 4.0
    assert direction_density(sq, w, t) == pytest.approx(want, rel=1e-9)


# --------------------------------------------------------------------------
# sampling


def test_uniform_direction_law_and_trials():
    sq = ConvexPolygon.unit_square()
    rng = RngStream(100)
    n = 40000
    thetas = np.empty(n)
    trials = np.empty(n)
    for i in range(n):
        thetas[i], trials[i] = sample_direction(sq, Uniform(), rng)
    assert trials.mean() == pytest.approx(PI / 2, abs=0.02)
    # chi-squared against the analytic density over 20 bins
    edges = np.linspace(0.0, PI, 21)
    obs, _ = np.histogram(thetas, bins=edges)
    probs = np.array(
        [
            integrate.quad(
                lambda t: (abs(math.cos(t)) + abs(math.sin(t))) / 4.0, a, b
            )[0]
            for a, b in zip(edges[:-1], edges[1:])
        ]
    )
    p = stats.chisquare(obs, probs / probs.sum() * n).pvalue
    assert p > 0.01


def test_axis_direction_two_point_support():
    rect = ConvexPolygon.rectangle(0, 0, 3, 1)
    rng = RngStream(101)
    thetas = np.array([sample_direction(rect, AxisAligned(), rng)[0] for _ in range(4000)])
    assert set(np.round(thetas, 12)) <= {round(PI / 2, 12), round(PI, 12)}
    # horizontal cuts (theta = pi/2, |l| = 1) vs vertical (theta = pi, |l| = 3)
    frac_h = np.mean(thetas < 2.0)
    assert frac_h == pytest.approx(0.25, abs=0.03)


def test_offset_uniform_on_projection_interval():
    sq = ConvexPolygon.unit_square()
    rng = RngStream(102)
    offs = []
    for _ in range(6000):
        cs = sample_cut(sq, Uniform(), rng)
        seg = project(sq, cs.cut.theta)
        offs.append((cs.cut.offset - seg.lo) / seg.length)
    assert stats.kstest(offs, "uniform").pvalue > 0.01


def test_custom_sampler_matches_uniform_law():
    sq = ConvexPolygon.unit_square()
    rng = RngStream(103)
    w = Custom(fn=lambda t: 1.0, sup=1.0)
    a = np.array([sample_direction(sq, w, rng.child(0, i))[0] for i in range(4000)])
    b = np.array(
        [sample_direction(sq, Uniform(), rng.child(1, i))[0] for i in range(4000)]
    )
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_custom_envelope_violation():
    sq = ConvexPolygon.unit_square()
    w = Custom(fn=lambda t: 5.0, sup=1.0)  # declared sup is a lie
    with pytest.raises(EnvelopeViolation):
        for i in range(100):
            sample_direction(sq, w, RngStream(104).child(i))


def test_mixed_component_frequencies():
    sq = ConvexPolygon.unit_square()
    w = mondrian_style(1.0, 1.0)  # axis mass 2, uniform mass 4
    rng = RngStream(105)
    comps = np.array([sample_cut(sq, w, rng).component for _ in range(6000)])
    assert np.mean(comps == 0) == pytest.approx(2.0 / 6.0, abs=0.03)


def test_direction_law_translation_invariant():
    gen = np.random.default_rng(6)
    p = random_convex_polygon(gen)
    q = ConvexPolygon(p.vertices + np.array([3.7, -1.2]))
    a = np.array(
        [sample_direction(p, Uniform(), RngStream(9).child(0, i))[0] for i in range(3000)]
    )
    b = np.array(
        [sample_direction(q, Uniform(), RngStream(9).child(1, i))[0] for i in range(3000)]
    )
    assert stats.ks_2samp(a, b).pvalue > 0.01
    for t in (0.3, 1.1, 2.9):
        assert direction_density(p, Uniform(), t) == pytest.approx(
            direction_density(q, Uniform(), t), rel=1e-12
        )
