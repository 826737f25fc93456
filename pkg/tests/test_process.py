import json
import math

import numpy as np
import pytest
from scipy import stats

from bsptree.errors import PointOutsideDomain, SubdomainNotContained, TimeOutOfRange
from bsptree.geometry import ConvexPolygon, CutLine, contains, perimeter, polygon_area
from bsptree.measure import AxisAligned, Uniform, block_measure, sample_cut
from bsptree.process import (
    BspTree,
    CutEvent,
    equivalent_global_clock,
    extend,
    locate,
    locate_many,
    restrict,
    sample_bsp,
)
from bsptree.rng import RngStream
from conftest import random_convex_polygon

SQ = ConvexPolygon.unit_square()


# --------------------------------------------------------------------------
# generative law


def test_no_cut_probability_exponential_tail():
    # P(no cut by tau) = exp(-tau * measure); unit square, uniform: PE = 4
    tau = 0.1
    root = RngStream(1)
    n = 4000
    empty = sum(
        sample_bsp(SQ, tau, Uniform(), root.child(i)).num_cuts == 0 for i in range(n)
    )
    want = math.exp(-tau * 4.0)
    se = math.sqrt(want * (1 - want) / n)
    assert abs(empty / n - want) < 4 * se


def test_first_waiting_time_distribution():
    root = RngStream(2)
    n = 3000
    waits = np.array(
        [equivalent_global_clock(SQ_SNAP, Uniform(), root.child(i))[1] for i in range(n)]
    )
    assert stats.kstest(waits, "expon", args=(0, 1.0 / 4.0)).pvalue > 0.01


SQ_SNAP = sample_bsp(SQ, 1e-9, Uniform(), RngStream(0)).snapshot(1e-9)


def test_block_choice_proportional_to_measure():
    tree = sample_bsp(SQ, 2.0, Uniform(), RngStream(3))
    snap = tree.snapshot(tree.budget)
    ms = np.array([block_measure(p, Uniform()) for _, p in snap.blocks])
    ids = [i for i, _ in snap.blocks]
    root = RngStream(4)
    n = 6000
    picks = np.array(
        [equivalent_global_clock(snap, Uniform(), root.child(i))[0] for i in range(n)]
    )
    obs = np.array([(picks == i).sum() for i in ids])
    p = stats.chisquare(obs, ms / ms.sum() * n).pvalue
    assert p > 0.01


def test_axis_weight_produces_axis_cuts_only():
    root = RngStream(5)
    for i in range(20):
        tree = sample_bsp(SQ, 3.0, AxisAligned(), root.child(i))
        for ev in tree.events:
            assert ev.cut.theta in (math.pi / 2, math.pi)


def test_perimeter_sum_bound():
    # total leaf perimeter grows by at most 2 * diameter per cut
    root = RngStream(6)
    for i in range(200):
        tree = sample_bsp(SQ, 3.0, Uniform(), root.child(i))
        bound = 4.0 + 2.0 * tree.num_cuts * math.sqrt(2.0)
        assert tree.perimeter_sum() <= bound + 1e-9


def test_event_times_increasing_and_within_budget():
    tree = sample_bsp(SQ, 4.0, Uniform(), RngStream(7))
    times = [ev.time for ev in tree.events]
    assert all(a < b for a, b in zip(times, times[1:]))
    assert all(0.0 < t < tree.budget for t in times)


def test_leaves_tile_domain():
    root = RngStream(8)
    gen = np.random.default_rng(8)
    for i in range(10):
        dom = random_convex_polygon(gen)
        tree = sample_bsp(dom, 1.0, Uniform(), root.child(i))
        areas = [polygon_area(p) for p in tree.leaf_polygons()]
        assert sum(areas) == pytest.approx(polygon_area(dom), rel=1e-9)


# --------------------------------------------------------------------------
# mondrian reduction oracle


def mondrian_first_cut(x0, y0, x1, y1, gen):
    """Independent 2D Mondrian first-cut: axis proportional to extent,
    position uniform along the chosen side."""
    w, h = x1 - x0, y1 - y0
    if gen.random() * (w + h) < w:
        return "v", x0 + gen.random() * w
    return "h", y0 + gen.random() * h


def test_axis_first_cut_matches_mondrian_oracle():
    rect = ConvexPolygon.rectangle(0.0, 0.0, 2.0, 1.0)
    root = RngStream(9)
    n = 20000
    axes, poss = [], []
    for i in range(n):
        # conditioned on a cut happening, the first cut is one sample_cut draw
        cut = sample_cut(rect, AxisAligned(), root.child(i)).cut
        if cut.theta == math.pi:  # normal (-1, 0): vertical cut at x = -offset
            axes.append("v")
            poss.append(("v", -cut.offset))
        else:
            axes.append("h")
            poss.append(("h", cut.offset))
    gen = np.random.default_rng(10)
    o_axes, o_poss = [], []
    for _ in range(n):
        a, p = mondrian_first_cut(0.0, 0.0, 2.0, 1.0, gen)
        o_axes.append(a)
        o_poss.append((a, p))
    table = [
        [axes.count("v"), axes.count("h")],
        [o_axes.count("v"), o_axes.count("h")],
    ]
    assert stats.chi2_contingency(table).pvalue > 0.01
    for axis in ("v", "h"):
        mine = [p for a, p in poss if a == axis]
        theirs = [p for a, p in o_poss if a == axis]
        assert stats.ks_2samp(mine, theirs).pvalue > 0.01


# --------------------------------------------------------------------------
# snapshots and location


def test_snapshot_refines_monotonically():
    tree = sample_bsp(SQ, 4.0, Uniform(), RngStream(11))
    assert len(tree.snapshot(0.0).blocks) == 1
    prev = 1
    for t in np.linspace(0.0, 4.0, 9):
        k = len(tree.snapshot(float(t)).blocks)
        assert k >= prev
        prev = k
    assert len(tree.snapshot(tree.budget).blocks) == tree.num_cuts + 1
    with pytest.raises(TimeOutOfRange):
        tree.snapshot(4.5)
    with pytest.raises(TimeOutOfRange):
        tree.snapshot(-0.1)


def test_locate_matches_linear_scan():
    tree = sample_bsp(SQ, 3.0, Uniform(), RngStream(12))
    snap = tree.snapshot(tree.budget)
    gen = np.random.default_rng(13)
    pts = gen.uniform(0.02, 0.98, size=(300, 2))
    ids = locate_many(snap, pts)
    for p, bid in zip(pts, ids):
        assert locate(snap, p) == bid
        # oracle: the reported block actually contains the point
        poly = dict(snap.blocks)[bid]
        assert contains(poly, p)
    with pytest.raises(PointOutsideDomain):
        locate(snap, (5.0, 5.0))
    with pytest.raises(PointOutsideDomain):
        locate_many(snap, np.array([[0.5, 0.5], [9.0, 9.0]]))


# --------------------------------------------------------------------------
# serialization


def test_json_round_trip_and_determinism():
    tree = sample_bsp(SQ, 3.0, Uniform(), RngStream(14))
    back = BspTree.from_json(json.loads(tree.to_json_str()))
    assert back.events == tree.events
    assert back.to_json_str() == tree.to_json_str()
    assert [p for _, p in back.leaves()] == [p for _, p in tree.leaves()]


def test_svg_has_one_polygon_per_leaf():
    tree = sample_bsp(SQ, 2.0, Uniform(), RngStream(15))
    svg = tree.to_svg()
    assert svg.count("<polygon") == tree.num_cuts + 1
    assert svg.startswith("<svg") or "<svg" in svg


# --------------------------------------------------------------------------
# restriction / extension


def test_restrict_to_full_domain_is_identity():
    tree = sample_bsp(SQ, 3.0, Uniform(), RngStream(16))
    r = restrict(tree, SQ)
    assert r.events == tree.events


def test_restrict_drops_missing_cuts_and_keeps_times():
    tree = sample_bsp(SQ, 3.0, Uniform(), RngStream(17))
    sub = ConvexPolygon.rectangle(0.3, 0.3, 0.7, 0.7)
    r = restrict(tree, sub)
    # every kept time appears in the original event list
    orig_times = {ev.time for ev in tree.events}
    assert all(ev.time in orig_times for ev in r.events)
    assert polygon_area(r.domain) == pytest.approx(0.16, rel=1e-9)
    areas = [polygon_area(p) for p in r.leaf_polygons()]
    assert sum(areas) == pytest.approx(0.16, rel=1e-9)


def test_restrict_outside_domain_raises():
    tree = sample_bsp(SQ, 1.0, Uniform(), RngStream(18))
    with pytest.raises(SubdomainNotContained):
        restrict(tree, ConvexPolygon.rectangle(0.5, 0.5, 1.5, 1.5))


def test_extend_round_trips_through_restrict():
    dom = ConvexPolygon.rectangle(-0.5, -0.5, 1.5, 1.5)
    sub = SQ
    root = RngStream(19)
    for i in range(25):
        small = sample_bsp(sub, 2.0, Uniform(), root.child(0, i))
        big = extend(small, dom, Uniform(), root.child(1, i))
        back = restrict(big, sub)
        assert back.events == small.events
        # extension adds cuts, never removes
        assert big.num_cuts >= small.num_cuts
        times = [ev.time for ev in big.events]
        assert all(a < b for a, b in zip(times, times[1:]))


def test_extend_rejects_foreign_subdomain():
    small = sample_bsp(SQ, 1.0, Uniform(), RngStream(20))
    with pytest.raises(SubdomainNotContained):
        extend(small, ConvexPolygon.rectangle(2, 2, 3, 3), Uniform(), RngStream(21))


def test_extend_cut_count_distribution_matches_direct():
    # marginal law check: number of cuts on the big domain
    dom = ConvexPolygon.rectangle(0.0, 0.0, 1.4, 1.4)
    root = RngStream(22)
    n = 500
    ext_counts = np.empty(n)
    direct_counts = np.empty(n)
    for i in range(n):
        small = sample_bsp(SQ, 1.5, Uniform(), root.child(0, i))
        ext_counts[i] = extend(small, dom, Uniform(), root.child(1, i)).num_cuts
        direct_counts[i] = sample_bsp(dom, 1.5, Uniform(), root.child(2, i)).num_cuts
    assert stats.ks_2samp(ext_counts, direct_counts).pvalue > 0.01
