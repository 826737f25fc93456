"""The generative partition process and its restriction/extension.

A realization is a right-continuous Markov jump process on partitions of
a convex domain over the time interval (0, budget]: waiting times are
exponential with rate equal to the summed block measures, the block to
cut is chosen proportionally to its measure, and the cut line follows
the direction-weight law.  The first proposed event past the budget is
rejected and the process stops.

Node identifiers are stable: the root is 0 and the j-th cut (0-based)
assigns its below/above children ids 2j+1 and 2j+2, so a tree can be
replayed deterministically from its event list.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    DegenerateCut,
    PointOutsideDomain,
    RunawayProcess,
    SubdomainNotContained,
    TimeOutOfRange,
)
from .geometry import ConvexPolygon, CutLine, Point2, intersect, polygon_area, split
from .measure import DirectionWeight, block_measure, sample_cut, weight_from_json

MAX_CUTS = 10**6


@dataclass(frozen=True)
class CutEvent:
    time: float
    block_id: int
    cut: CutLine

    def to_json(self):
        return {"time": self.time, "block_id": self.block_id, "cut": self.cut.to_json()}

    @classmethod
    def from_json(cls, obj):
        return cls(
            time=float(obj["time"]),
            block_id=int(obj["block_id"]),
            cut=CutLine.from_json(obj["cut"]),
        )


class _Node:
    __slots__ = ("poly", "time", "cut", "below", "above")

    def __init__(self, poly, time=None, cut=None, below=None, above=None):
        self.poly = poly
        self.time = time
        self.cut = cut
        self.below = below
        self.above = above

    @property
    def is_leaf(self):
        return self.below is None


@dataclass(frozen=True)
class PartitionSnapshot:
    """Leaf set of a tree truncated to events at or before ``time``."""

    time: float
    blocks: tuple  # ordered (block_id, ConvexPolygon) pairs, id ascending


class BspTree:
    """Binary tree of timed cuts over a convex domain.

    Immutable after construction; built either by the sampler or by
    replaying an event list (JSON round-trip).
    """

    __slots__ = ("domain", "budget", "events", "nodes", "_flat")

    def __init__(self, domain: ConvexPolygon, budget: float, events, nodes=None):
        if budget <= 0:
            raise ValueError("budget must be positive")
        self.domain = domain
        self.budget = float(budget)
        self.events = tuple(events)
        self.nodes = nodes if nodes is not None else _replay(domain, self.events)
        self._flat = None

    @property
    def num_cuts(self):
        return len(self.events)

    def leaves(self):
        """Final (block_id, polygon) pairs, ascending id."""
        return [(i, n.poly) for i, n in sorted(self.nodes.items()) if n.is_leaf]

    def leaf_polygons(self):
        return [p for _, p in self.leaves()]

    def snapshot(self, t: float) -> PartitionSnapshot:
        if not (0.0 <= t <= self.budget):
            raise TimeOutOfRange(f"t={t} outside [0, {self.budget}]")
        # replay: cheaper to walk events than to copy the node map
        live = {0: self.nodes[0]}
        for j, ev in enumerate(self.events):
            if ev.time > t:
                break
            live.pop(ev.block_id)
            live[2 * j + 1] = self.nodes[2 * j + 1]
            live[2 * j + 2] = self.nodes[2 * j + 2]
        return PartitionSnapshot(
            time=t, blocks=tuple((i, live[i].poly) for i in sorted(live))
        )

    def perimeter_sum(self):
        return sum(_kernels.perimeter(p.vertices) for p in self.leaf_polygons())

    def to_json(self):
        return {
            "domain": self.domain.to_json(),
            "budget": self.budget,
            "events": [e.to_json() for e in self.events],
        }

    def to_json_str(self):
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, obj):
        return cls(
            domain=ConvexPolygon.from_json(obj["domain"]),
            budget=float(obj["budget"]),
            events=[CutEvent.from_json(e) for e in obj["events"]],
        )

    def to_svg(self, size=400):
        """One filled path per leaf polygon, fill keyed by block id hash."""
        import hashlib

        verts = self.domain.vertices
        x0, y0 = verts.min(axis=0)
        x1, y1 = verts.max(axis=0)
        span = max(x1 - x0, y1 - y0)
        scale = size / span

        def sx(x):
            return (x - x0) * scale

        def sy(y):
            return (y1 - y) * scale  # flip: svg y grows downward

        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
            f'height="{size}" viewBox="0 0 {size} {size}">'
        ]
        for bid, poly in self.leaves():
            h = hashlib.md5(str(bid).encode()).digest()
            hue = int.from_bytes(h[:2], "big") % 360
            pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in poly.vertices)
            parts.append(
                f'<polygon points="{pts}" fill="hsl({hue},60%,70%)" '
                f'stroke="black" stroke-width="1"><title>block {bid}</title></polygon>'
            )
        parts.append("</svg>")
        return "\n".join(parts)


def _replay(domain, events):
    nodes = {0: _Node(domain)}
    for j, ev in enumerate(events):
        node = nodes[ev.block_id]
        if not node.is_leaf:
            raise ValueError(f"event {j} cuts non-leaf node {ev.block_id}")
        below, above = split(node.poly, ev.cut)
        node.time = ev.time
        node.cut = ev.cut
        node.below = 2 * j + 1
        node.above = 2 * j + 2
        nodes[node.below] = _Node(below)
        nodes[node.above] = _Node(above)
    return nodes


# ---------------------------------------------------------------------------
# generative sampler


def sample_bsp(
    domain: ConvexPolygon,
    budget: float,
    w: DirectionWeight,
    rng,
    max_cuts: int = MAX_CUTS,
) -> BspTree:
    """Draw one realization of the partition process."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    gen = rng.generator
    nodes = {0: _Node(domain)}
    leaves = {0: domain}
    measures = {0: block_measure(domain, w)}
    total = measures[0]
    events = []
    t = 0.0
    while True:
        t += gen.exponential(1.0 / total)
        if t >= budget:
            break
        if len(events) >= max_cuts:
            raise RunawayProcess(f"exceeded {max_cuts} cuts at time {t}")
        # block proportional to measure
        ids = sorted(leaves)
        weights = [measures[i] for i in ids]
        bid = ids[rng.choice_weighted(weights)]
        poly = leaves[bid]
        below = above = None
        for _ in range(100):
            cs = sample_cut(poly, w, rng)
            try:
                below, above = split(poly, cs.cut)
                break
            except DegenerateCut:
                # probability-zero event in the continuous law: resample
                continue
        else:
            raise RunawayProcess("could not sample a non-degenerate cut")
        j = len(events)
        events.append(CutEvent(time=t, block_id=bid, cut=cs.cut))
        node = nodes[bid]
        node.time, node.cut, node.below, node.above = t, cs.cut, 2 * j + 1, 2 * j + 2
        nodes[node.below] = _Node(below)
        nodes[node.above] = _Node(above)
        del leaves[bid]
        leaves[node.below] = below
        leaves[node.above] = above
        m_b = block_measure(below, w)
        m_a = block_measure(above, w)
        total += m_b + m_a - measures.pop(bid)
        measures[node.below] = m_b
        measures[node.above] = m_a
    return BspTree(domain, budget, events, nodes=nodes)


def equivalent_global_clock(snapshot: PartitionSnapshot, w: DirectionWeight, rng):
    """(block_id, waiting_time) for the next event of a partition.

    Global-clock form of the per-block exponential race: the waiting
    time is Exp(sum of measures) and the block wins proportionally to
    its measure.
    """
    if not snapshot.blocks:
        raise ValueError("empty partition")
    ids = [i for i, _ in snapshot.blocks]
    ms = [block_measure(p, w) for _, p in snapshot.blocks]
    wait = rng.generator.exponential(1.0 / sum(ms))
    return ids[rng.choice_weighted(ms)], wait


# ---------------------------------------------------------------------------
# point location


def locate(snapshot: PartitionSnapshot, p) -> int:
    """Id of the block containing ``p``; boundary ties go to the lowest id."""
    if isinstance(p, Point2):
        x, y = p.x, p.y
    else:
        x, y = float(p[0]), float(p[1])
    from .geometry import EPS_GEOM

    for bid, poly in snapshot.blocks:
        if _kernels.contains(poly.vertices, x, y, EPS_GEOM):
            return bid
    raise PointOutsideDomain(f"({x}, {y}) not in any block")


def locate_many(snapshot: PartitionSnapshot, pts) -> np.ndarray:
    """Vectorized ``locate``: block id per row of ``pts`` (n, 2)."""
    from .geometry import EPS_GEOM

    pts = np.ascontiguousarray(pts, dtype=float)
    out = np.full(len(pts), -1, dtype=np.int64)
    remaining = np.arange(len(pts))
    for bid, poly in snapshot.blocks:
        if len(remaining) == 0:
            break
        inside = _kernels.contains_many(poly.vertices, pts[remaining], EPS_GEOM)
        out[remaining[inside]] = bid
        remaining = remaining[~inside]
    if len(remaining):
        raise PointOutsideDomain(f"{len(remaining)} points outside the domain")
    return out


def locate_many_tree(tree: BspTree, pts) -> np.ndarray:
    """Block id per row of ``pts`` by vectorized descent through the cut
    tree.

    Much faster than scanning leaves when the partition is fine.  Points
    are assumed to lie inside the domain; exact-boundary points go to
    the above side of their cut (a measure-zero deviation from
    ``locate_many``'s tolerance convention).
    """
    pts = np.ascontiguousarray(pts, dtype=float)
    if tree._flat is None:
        # flat arrays over node ids (trees are immutable, so cache them)
        size = 2 * len(tree.events) + 1
        nx = np.zeros(size)
        ny = np.zeros(size)
        off = np.zeros(size)
        kids = np.full((size, 2), -1, dtype=np.int64)
        for nid, node in tree.nodes.items():
            if not node.is_leaf:
                nx[nid], ny[nid] = node.cut.normal
                off[nid] = node.cut.offset
                kids[nid] = node.below, node.above
        tree._flat = (nx, ny, off, kids)
    nx, ny, off, kids = tree._flat
    xs, ys = pts[:, 0], pts[:, 1]
    out = np.empty(len(pts), dtype=np.int64)
    stack = [(0, np.arange(len(pts)))]
    while stack:
        nid, idx = stack.pop()
        if len(idx) == 0:
            continue
        if kids[nid, 0] < 0:
            out[idx] = nid
            continue
        below = xs[idx] * nx[nid] + ys[idx] * ny[nid] - off[nid] < 0.0
        stack.append((kids[nid, 0], idx[below]))
        stack.append((kids[nid, 1], idx[~below]))
    return out


# ---------------------------------------------------------------------------
# restriction


def _crosses(poly, cut, margin=0.0):
    lo, hi = _kernels.project(poly.vertices, *cut.normal)
    return lo + margin < cut.offset < hi - margin


def restrict(tree: BspTree, sub: ConvexPolygon, _broken_skip_crossing=False) -> BspTree:
    """Restrict a realization to a sub-polygon of its domain.

    Cuts whose line crosses the sub-region induce cuts at the same
    times; the rest are dropped.  ``_broken_skip_crossing`` deliberately
    drops crossing cuts too -- a negative control for the consistency
    test harness, never for production use.
    """
    inter = intersect(sub, tree.domain)
    if inter is None or abs(polygon_area(inter) - polygon_area(sub)) > 1e-9:
        raise SubdomainNotContained("sub-polygon is not inside the tree domain")

    region = {0: sub}  # original node id -> its live sub-region polygon
    new_id = {0: 0}
    new_events = []
    for j, ev in enumerate(tree.events):
        if ev.block_id not in region:
            continue
        r = region.pop(ev.block_id)
        cb, ca = 2 * j + 1, 2 * j + 2
        pieces = None
        if not _broken_skip_crossing and _crosses(r, ev.cut):
            try:
                pieces = split(r, ev.cut)
            except DegenerateCut:
                pieces = None  # grazing within tolerance: treat as a miss
        if pieces is not None:
            k = len(new_events)
            new_events.append(CutEvent(time=ev.time, block_id=new_id[ev.block_id], cut=ev.cut))
            region[cb], region[ca] = pieces
            new_id[cb], new_id[ca] = 2 * k + 1, 2 * k + 2
        else:
            # r lies (or is forced) entirely on one side of the cut line
            lo, hi = _kernels.project(r.vertices, *ev.cut.normal)
            side_below = (lo + hi) / 2.0 < ev.cut.offset
            child = cb if side_below else ca
            region[child] = r
            new_id[child] = new_id[ev.block_id]
    return BspTree(sub, tree.budget, new_events)


# ---------------------------------------------------------------------------
# extension


def extend(
    tree_on_sub: BspTree,
    domain: ConvexPolygon,
    w: DirectionWeight,
    rng,
    max_rejects: int = MAX_CUTS,
) -> BspTree:
    """Extend a realization on a sub-polygon to a larger domain.

    The extension interleaves two event sources: "lift" events replay
    the sub-tree's cuts (extended to full chords of the enclosing
    block), and "gencut" events add cuts that never cross the live
    sub-regions, at rate c(domain partition) - c(sub partition).  The
    restriction of the result to the sub-domain reproduces the input
    exactly, and its marginal law is that of sampling on the domain
    directly.
    """
    sub = tree_on_sub.domain
    inter = intersect(sub, domain)
    if inter is None or abs(polygon_area(inter) - polygon_area(sub)) > 1e-9:
        raise SubdomainNotContained("sub-tree domain is not inside the new domain")
    budget = tree_on_sub.budget
    gen = rng.generator

    # live domain leaves
    leaves = {0: domain}
    measures = {0: block_measure(domain, w)}
    # domain leaf id -> (sub leaf id, sub polygon, sub measure); at most one
    sub_region = {0: (0, sub, block_measure(sub, w))}
    sub_nodes = tree_on_sub.nodes
    events = []
    t = 0.0
    next_sub = 0  # index into tree_on_sub.events

    def dom_leaf_of(sub_leaf_id):
        for did, reg in sub_region.items():
            if reg is not None and reg[0] == sub_leaf_id:
                return did
        raise AssertionError("sub leaf lost during extension")

    while True:
        gap = sum(measures.values()) - sum(
            reg[2] for reg in sub_region.values() if reg is not None
        )
        if gap > 1e-12:
            gencut_t = t + gen.exponential(1.0) / gap
        else:
            gencut_t = math.inf
        sigma_t = (
            tree_on_sub.events[next_sub].time
            if next_sub < len(tree_on_sub.events)
            else math.inf
        )
        t_next = min(sigma_t, gencut_t)
        if t_next >= budget:
            break
        t = t_next
        if t_next == sigma_t:
            # lift: replay the sub cut on the enclosing domain block
            sev = tree_on_sub.events[next_sub]
            did = dom_leaf_of(sev.block_id)
            poly = leaves[did]
            below, above = split(poly, sev.cut)
            j = len(events)
            events.append(CutEvent(time=t, block_id=did, cut=sev.cut))
            nb, na = 2 * j + 1, 2 * j + 2
            sub_below = sub_nodes[2 * next_sub + 1].poly
            sub_above = sub_nodes[2 * next_sub + 2].poly
            del leaves[did]
            leaves[nb], leaves[na] = below, above
            measures.pop(did)
            measures[nb] = block_measure(below, w)
            measures[na] = block_measure(above, w)
            sub_region.pop(did)
            sub_region[nb] = (2 * next_sub + 1, sub_below, block_measure(sub_below, w))
            sub_region[na] = (2 * next_sub + 2, sub_above, block_measure(sub_above, w))
            next_sub += 1
        else:
            # gencut: cut a domain block without crossing its sub-region
            ids = sorted(leaves)
            gaps = [
                measures[i] - (sub_region.get(i)[2] if sub_region.get(i) else 0.0)
                for i in ids
            ]
            did = ids[rng.choice_weighted(gaps)]
            poly = leaves[did]
            reg = sub_region.get(did)
            for _ in range(max_rejects):
                cs = sample_cut(poly, w, rng)
                if reg is not None and _crosses(reg[1], cs.cut):
                    continue
                try:
                    below, above = split(poly, cs.cut)
                except DegenerateCut:
                    continue
                break
            else:
                raise RunawayProcess("gencut rejection sampling did not terminate")
            j = len(events)
            events.append(CutEvent(time=t, block_id=did, cut=cs.cut))
            nb, na = 2 * j + 1, 2 * j + 2
            del leaves[did]
            leaves[nb], leaves[na] = below, above
            measures.pop(did)
            measures[nb] = block_measure(below, w)
            measures[na] = block_measure(above, w)
            sub_region.pop(did, None)
            if reg is not None:
                lo, hi = _kernels.project(reg[1].vertices, *cs.cut.normal)
                side_below = (lo + hi) / 2.0 < cs.cut.offset
                sub_region[nb if side_below else na] = reg
                sub_region[na if side_below else nb] = None
            else:
                sub_region[nb] = None
                sub_region[na] = None
    return BspTree(domain, budget, events)
