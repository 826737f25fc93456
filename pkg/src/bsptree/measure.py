"""Cut-direction measures and cut-line samplers.

A direction weight assigns prior mass over cut directions theta in
(0, pi].  The induced measure of a block is

    c(block) = integral of weight(theta) * |l(theta)| d theta

where |l(theta)| is the length of the block's projection at angle theta.
Under the uniform weight this equals the block perimeter exactly, which
is also the exponential event rate of the block in the generative
process.  The axis-aligned weight (atoms at pi/2 and pi) recovers the
Mondrian special case; mixtures interpolate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import EnvelopeViolation, QuadratureFailure
from .geometry import ConvexPolygon, CutLine, perimeter, project, diameter

PI = math.pi

# axis-aligned atoms: vertical cut (normal along x) is theta = pi,
# horizontal cut (normal along y) is theta = pi/2
AXIS_THETAS = (PI / 2, PI)


# ---------------------------------------------------------------------------
# weight types


class DirectionWeight:
    """Base class; instances are immutable and shareable."""

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(DirectionWeight):
    """weight(theta) = 1 on (0, pi]; block measure equals the perimeter."""

    def to_json(self):
        return {"kind": "uniform"}


@dataclass(frozen=True)
class AxisAligned(DirectionWeight):
    """Unit atoms at pi/2 and pi: only horizontal/vertical cuts."""

    def to_json(self):
        return {"kind": "axis"}


@dataclass(frozen=True)
class Custom(DirectionWeight):
    """Arbitrary non-negative weight function with a declared supremum.

    ``sup`` must dominate ``fn`` on (0, pi]; it sizes the rejection
    envelope, and a proposal observing fn(theta) > sup raises
    EnvelopeViolation.  Available programmatically only (no JSON form).
    """

    fn: Callable[[float], float]
    sup: float

    def __post_init__(self):
        if not (self.sup > 0 and math.isfinite(self.sup)):
            raise ValueError("sup must be positive and finite")

    def to_json(self):
        raise ValueError("custom weights have no JSON representation")


@dataclass(frozen=True)
class Mixed(DirectionWeight):
    """Weighted combination of component measures.

    ``components`` is a sequence of (weight, mix_constant) pairs; the
    block measure is the mix-constant-weighted sum of the component
    measures, and sampling first picks a component proportionally to
    mix_constant * component_measure(block).
    """

    components: tuple[tuple[DirectionWeight, float], ...]

    def __init__(self, components):
        comps = tuple((w, float(c)) for w, c in components)
        if len(comps) < 2:
            raise ValueError("mixed weight needs at least two components")
        if all(c == 0.0 for _, c in comps):
            raise ValueError("at least one mix constant must be positive")
        if any(c < 0.0 for _, c in comps):
            raise ValueError("mix constants must be non-negative")
        object.__setattr__(self, "components", comps)

    def to_json(self):
        return {
            "kind": "mixed",
            "components": [
                dict(w.to_json(), c=c) for w, c in self.components
            ],
        }


def mondrian_style(c_axis: float = 1.0, c_uniform: float = 1.0) -> Mixed:
    """The two-branch axis/uniform mixture used by the relational model."""
    return Mixed([(AxisAligned(), c_axis), (Uniform(), c_uniform)])


def weight_from_json(obj) -> DirectionWeight:
    kind = obj.get("kind")
    if kind == "uniform":
        return Uniform()
    if kind == "axis":
        return AxisAligned()
    if kind == "mixed":
        return Mixed([(weight_from_json(c), c.get("c", 1.0)) for c in obj["components"]])
    raise ValueError(f"unknown weight kind {kind!r}")


# ---------------------------------------------------------------------------
# quadrature

QUAD_REL_TOL = 1e-9
QUAD_MAX_DEPTH = 40


def _simpson(fa, fm, fb, h):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f, a, b, fa, fm, fb, whole, depth, tol):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    err = left + right - whole
    if abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    if depth >= QUAD_MAX_DEPTH:
        raise QuadratureFailure(f"max depth {QUAD_MAX_DEPTH} exceeded on [{a}, {b}]")
    return _adaptive(f, a, m, fa, flm, fm, left, depth + 1, 0.5 * tol) + _adaptive(
        f, m, b, fm, frm, fb, right, depth + 1, 0.5 * tol
    )


def adaptive_simpson(f, a, b, rel_tol=QUAD_REL_TOL):
    """Adaptive Simpson quadrature with relative tolerance control."""
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = _simpson(fa, fm, fb, b - a)
    scale = max(abs(whole), 1e-300)
    return _adaptive(f, a, b, fa, fm, fb, whole, 0, rel_tol * scale)


def projection_kinks(poly: ConvexPolygon):
    """Angles in (0, pi) where |l(theta)| has a kink.

    The support vertex changes where the projection axis is orthogonal
    to an edge, i.e. at edge_angle + pi/2 (mod pi).  pi/2 is always
    included (kink for axis-parallel edges of rectangles).
    """
    verts = poly.vertices
    edges = np.roll(verts, -1, axis=0) - verts
    ang = (np.arctan2(edges[:, 1], edges[:, 0]) + PI / 2) % PI
    pts = set(float(a) for a in ang if 1e-12 < a < PI - 1e-12)
    pts.add(PI / 2)
    return sorted(pts)


def integrate_over_directions(poly: ConvexPolygon, f, rel_tol=QUAD_REL_TOL):
    """Integrate ``f(theta)`` over (0, pi], splitting at projection kinks."""
    pts = [0.0] + projection_kinks(poly) + [PI]
    return sum(
        adaptive_simpson(f, lo, hi, rel_tol) for lo, hi in zip(pts[:-1], pts[1:])
    )


# ---------------------------------------------------------------------------
# measures and densities


def projection_length(poly: ConvexPolygon, theta: float) -> float:
    lo, hi = _kernels.project(poly.vertices, math.cos(theta), math.sin(theta))
    return hi - lo


def block_measure(poly: ConvexPolygon, w: DirectionWeight) -> float:
    """c(block) = integral of weight * projection length over (0, pi]."""
    if isinstance(w, Uniform):
        # closed form: the integral of |l(theta)| over (0, pi] is PE
        return perimeter(poly)
    if isinstance(w, AxisAligned):
        return sum(projection_length(poly, t) for t in AXIS_THETAS)
    if isinstance(w, Custom):
        return integrate_over_directions(
            poly, lambda t: w.fn(t) * projection_length(poly, t)
        )
    if isinstance(w, Mixed):
        return sum(c * block_measure(poly, comp) for comp, c in w.components if c > 0)
    raise TypeError(f"unknown weight {type(w)}")


def _atoms(w: DirectionWeight, poly: ConvexPolygon):
    """(theta, unnormalized mass) atoms contributed by discrete components."""
    if isinstance(w, AxisAligned):
        return [(t, projection_length(poly, t)) for t in AXIS_THETAS]
    if isinstance(w, Mixed):
        out = []
        for comp, c in w.components:
            if c > 0:
                out.extend((t, c * m) for t, m in _atoms(comp, poly))
        return out
    return []


def direction_density(poly: ConvexPolygon, w: DirectionWeight, theta: float) -> float:
    """Normalized direction law at ``theta``.

    Continuous weights give a probability density; for discrete atoms
    (AxisAligned, or atoms inside a Mixed) the probability mass of the
    atom at ``theta`` is returned instead.
    """
    if not (0.0 < theta <= PI):
        raise ValueError("theta must be in (0, pi]")
    total = block_measure(poly, w)
    atoms = _atoms(w, poly)
    atom_mass = sum(m for t, m in atoms if abs(t - theta) < 1e-12)
    if atom_mass > 0.0:
        return atom_mass / total
    if isinstance(w, (AxisAligned,)):
        return 0.0
    if isinstance(w, Uniform):
        return projection_length(poly, theta) / total
    if isinstance(w, Custom):
        return w.fn(theta) * projection_length(poly, theta) / total
    if isinstance(w, Mixed):
        dens = 0.0
        for comp, c in w.components:
            if c > 0 and not isinstance(comp, AxisAligned):
                dens += c * block_measure(poly, comp) / total * direction_density(
                    poly, comp, theta
                )
        return dens
    raise TypeError(f"unknown weight {type(w)}")


# ---------------------------------------------------------------------------
# samplers


@dataclass(frozen=True)
class CutSample:
    cut: CutLine
    trials: int
    component: Optional[int] = None


def sample_direction(poly: ConvexPolygon, w: DirectionWeight, rng):
    """Draw theta proportionally to weight(theta) * |l(theta)|.

    Returns (theta, trials) where ``trials`` counts rejection proposals.
    """
    theta, trials, _ = _sample_direction_comp(poly, w, rng)
    return theta, trials


def _sample_direction_comp(poly: ConvexPolygon, w: DirectionWeight, rng):
    gen = rng.generator
    verts = poly.vertices
    if isinstance(w, Uniform):
        # rejection against g = 1/pi with scale M = pi/2: the acceptance
        # ratio 2|l(theta)|/PE is always <= 1 since PE >= 2*diameter
        pe = _kernels.perimeter(verts)
        trials = 0
        while True:
            trials += 1
            u = gen.random(2)
            theta = PI * (1.0 - u[0])
            lo, hi = _kernels.project(verts, math.cos(theta), math.sin(theta))
            if u[1] * pe <= 2.0 * (hi - lo):
                return theta, trials, None
    if isinstance(w, AxisAligned):
        l_h = projection_length(poly, AXIS_THETAS[0])
        l_v = projection_length(poly, AXIS_THETAS[1])
        theta = AXIS_THETAS[0] if gen.random() * (l_h + l_v) < l_h else AXIS_THETAS[1]
        return theta, 1, None
    if isinstance(w, Custom):
        # envelope: weight * |l| <= sup * diameter
        bound = w.sup * _kernels.diameter(verts)
        trials = 0
        while True:
            trials += 1
            u = gen.random(2)
            theta = PI * (1.0 - u[0])
            ratio = w.fn(theta) * projection_length(poly, theta) / bound
            if ratio > 1.0:
                raise EnvelopeViolation(
                    f"acceptance ratio {ratio} > 1 at theta={theta}; declared sup is wrong"
                )
            if u[1] <= ratio:
                return theta, trials, None
    if isinstance(w, Mixed):
        masses = [c * block_measure(poly, comp) for comp, c in w.components]
        idx = rng.choice_weighted(masses)
        theta, trials, _ = _sample_direction_comp(poly, w.components[idx][0], rng)
        return theta, trials, idx
    raise TypeError(f"unknown weight {type(w)}")


def sample_cut(poly: ConvexPolygon, w: DirectionWeight, rng) -> CutSample:
    """Draw a full cut line: direction, then offset uniform on the
    projection interval."""
    theta, trials, comp = _sample_direction_comp(poly, w, rng)
    seg = project(poly, theta)
    while True:
        offset = seg.lo + rng.generator.random() * seg.length
        if seg.lo < offset < seg.hi:
            break
    return CutSample(cut=CutLine(theta=theta, offset=offset), trials=trials, component=comp)
