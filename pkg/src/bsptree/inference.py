"""Conditional-SMC over partition trees with collapsed conjugate
block likelihoods, plus the outer Gibbs loop.

One sweep advances C particles stage by stage; at every stage each
unfrozen particle gains one cut event (particle 1 replays the reference
path), incremental weights are the collapsed-evidence ratios, and
multinomial resampling follows with the reference index pinned.  Block
parameters are never instantiated: the likelihood of a partition is the
product over blocks of the conjugate marginal evidence, so incremental
weights only involve the block that was cut.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .errors import AllWeightsZero, DegenerateCut, RunawayProcess
from .geometry import ConvexPolygon
from .measure import DirectionWeight, Uniform, block_measure, sample_cut
from .process import BspTree, CutEvent, PartitionSnapshot, locate_many, split


# ---------------------------------------------------------------------------
# collapsed likelihoods


@dataclass(frozen=True)
class BetaBernoulli:
    """Beta(alpha0, beta0) prior over a per-block Bernoulli rate."""

    alpha0: float
    beta0: float

    def __post_init__(self):
        if self.alpha0 <= 0 or self.beta0 <= 0:
            raise ValueError("hyperparameters must be strictly positive")

    @property
    def num_values(self):
        return 2

    def block_log_evidence(self, counts):
        """log P(observations in one block), counts = [n0, n1]."""
        n0, n1 = counts[0], counts[1]
        if n0 == 0 and n1 == 0:
            return 0.0
        a, b = self.alpha0, self.beta0
        return (
            gammaln(a + n1)
            + gammaln(b + n0)
            - gammaln(a + b + n0 + n1)
            - (gammaln(a) + gammaln(b) - gammaln(a + b))
        )


@dataclass(frozen=True)
class DirichletMultinomial:
    """Dirichlet(alpha) prior over per-block label probabilities."""

    alpha: tuple

    def __init__(self, alpha):
        alpha = tuple(float(a) for a in alpha)
        if len(alpha) < 2 or any(a <= 0 for a in alpha):
            raise ValueError("alpha must have >= 2 strictly positive entries")
        object.__setattr__(self, "alpha", alpha)

    @property
    def num_values(self):
        return len(self.alpha)

    def block_log_evidence(self, counts):
        if sum(counts) == 0:
            return 0.0
        a = np.asarray(self.alpha)
        c = np.asarray(counts, dtype=float)
        return (
            gammaln(a + c).sum()
            - gammaln((a + c).sum())
            - (gammaln(a).sum() - gammaln(a.sum()))
        )


@dataclass(frozen=True)
class PointData:
    """Observations bound to planar positions: value i lives at points[i]."""

    points: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.values)


def log_marginal(likelihood, snapshot: PartitionSnapshot, data: PointData) -> float:
    """Collapsed log evidence of the data under a partition: the sum over
    blocks of the conjugate block evidence."""
    if likelihood is None or len(data) == 0:
        return 0.0
    ids = locate_many(snapshot, data.points)
    total = 0.0
    for bid, _ in snapshot.blocks:
        counts = np.bincount(
            data.values[ids == bid], minlength=likelihood.num_values
        )
        total += likelihood.block_log_evidence(counts)
    return float(total)


def log_marginal_tree(likelihood, tree: BspTree, data: PointData) -> float:
    """``log_marginal`` of the terminal partition, located by tree
    descent instead of a leaf scan (same value, much faster when the
    partition is fine)."""
    if likelihood is None or len(data) == 0:
        return 0.0
    from .process import locate_many_tree

    ids = locate_many_tree(tree, data.points)
    total = 0.0
    for bid in sorted({int(i) for i in ids}):
        counts = np.bincount(
            data.values[ids == bid], minlength=likelihood.num_values
        )
        total += likelihood.block_log_evidence(counts)
    return float(total)


# ---------------------------------------------------------------------------
# particles


@dataclass(frozen=True)
class CsmcConfig:
    num_particles: int = 20
    budget: float = 1.0
    weight: DirectionWeight = field(default_factory=Uniform)
    seed: Optional[int] = None  # informational; streams are passed explicitly

    def __post_init__(self):
        if self.num_particles < 1:
            raise ValueError("need at least one particle")
        if self.budget <= 0:
            raise ValueError("budget must be positive")


class _Leaf:
    __slots__ = ("poly", "measure", "idx", "log_ev")

    def __init__(self, poly, measure, idx, log_ev):
        self.poly = poly
        self.measure = measure
        self.idx = idx
        self.log_ev = log_ev


class Particle:
    """One hypothesis: a partial tree, its elapsed budget and weight."""

    __slots__ = ("leaves", "events", "elapsed", "frozen", "log_weight", "total_measure")

    def __init__(self, leaves, events, elapsed, frozen, log_weight, total_measure):
        self.leaves = leaves
        self.events = events
        self.elapsed = elapsed
        self.frozen = frozen
        self.log_weight = log_weight
        self.total_measure = total_measure

    @classmethod
    def initial(cls, domain, w, data, likelihood):
        m = block_measure(domain, w)
        if data is not None and likelihood is not None:
            idx = np.arange(len(data))
            log_ev = likelihood.block_log_evidence(
                np.bincount(data.values, minlength=likelihood.num_values)
            )
        else:
            idx = None
            log_ev = 0.0
        return cls(
            leaves={0: _Leaf(domain, m, idx, log_ev)},
            events=[],
            elapsed=0.0,
            frozen=False,
            log_weight=0.0,
            total_measure=m,
        )

    def copy(self):
        return Particle(
            leaves=dict(self.leaves),
            events=list(self.events),
            elapsed=self.elapsed,
            frozen=self.frozen,
            log_weight=self.log_weight,
            total_measure=self.total_measure,
        )

    def log_evidence(self):
        return sum(leaf.log_ev for leaf in self.leaves.values())

    def _apply_cut(self, bid, time, cut, w, data, likelihood):
        """Split leaf ``bid``; returns the incremental log evidence."""
        leaf = self.leaves[bid]
        below, above = split(leaf.poly, cut)
        j = len(self.events)
        self.events.append(CutEvent(time=time, block_id=bid, cut=cut))
        if leaf.idx is not None:
            side = cut.signed_distance(data.points[leaf.idx]) < 0.0
            idx_b, idx_a = leaf.idx[side], leaf.idx[~side]
            ev_b = likelihood.block_log_evidence(
                np.bincount(data.values[idx_b], minlength=likelihood.num_values)
            )
            ev_a = likelihood.block_log_evidence(
                np.bincount(data.values[idx_a], minlength=likelihood.num_values)
            )
        else:
            idx_b = idx_a = None
            ev_b = ev_a = 0.0
        delta = ev_b + ev_a - leaf.log_ev
        m_b = block_measure(below, w)
        m_a = block_measure(above, w)
        del self.leaves[bid]
        self.leaves[2 * j + 1] = _Leaf(below, m_b, idx_b, ev_b)
        self.leaves[2 * j + 2] = _Leaf(above, m_a, idx_a, ev_a)
        self.elapsed = time
        self.total_measure += m_b + m_a - leaf.measure
        return delta

    def extend_generative(self, budget, w, data, likelihood, rng):
        """One generative event; freezes on overshoot.  Returns the
        incremental log evidence (0 when frozen this stage)."""
        gen = rng.generator
        t = self.elapsed + gen.exponential(1.0 / self.total_measure)
        if t >= budget:
            self.frozen = True
            self.elapsed = budget
            return 0.0
        ids = sorted(self.leaves)
        bid = ids[rng.choice_weighted([self.leaves[i].measure for i in ids])]
        for _ in range(100):
            cs = sample_cut(self.leaves[bid].poly, w, rng)
            try:
                return self._apply_cut(bid, t, cs.cut, w, data, likelihood)
            except DegenerateCut:
                continue
        raise RunawayProcess("could not sample a non-degenerate cut")

    def to_tree(self, domain, budget):
        return BspTree(domain, budget, self.events)


# ---------------------------------------------------------------------------
# the sweep


def _logsumexp(v):
    m = max(v)
    if m == -math.inf:
        return -math.inf
    return m + math.log(sum(math.exp(x - m) for x in v))


def csmc_sweep(
    data: Optional[PointData],
    likelihood,
    cfg: CsmcConfig,
    reference: BspTree,
    rng,
    return_particles: bool = False,
) -> BspTree:
    """One conditional-SMC sweep; returns the selected terminal tree.
    With ``return_particles`` the full terminal particle list is returned
    alongside the tree (diagnostics; particle 0 is the conditioned one).

    ``reference`` must live on the same domain and budget; particle 1 is
    pinned to it and survives every resampling step.  Stream usage:
    child(0, stage, c) extends particle c, child(1, stage) resamples,
    child(2) draws the terminal particle.
    """
    domain = reference.domain
    budget = cfg.budget
    if abs(budget - reference.budget) > 1e-12:
        raise ValueError("reference budget differs from config budget")
    C = cfg.num_particles
    particles = [
        Particle.initial(domain, cfg.weight, data, likelihood) for _ in range(C)
    ]
    ref_events = reference.events
    stage = 0
    while any(not p.frozen for p in particles):
        stage += 1
        for c, p in enumerate(particles):
            if p.frozen:
                continue
            if c == 0:
                if stage <= len(ref_events):
                    ev = ref_events[stage - 1]
                    delta = p._apply_cut(
                        ev.block_id, ev.time, ev.cut, cfg.weight, data, likelihood
                    )
                else:
                    p.frozen = True
                    p.elapsed = budget
                    delta = 0.0
            else:
                delta = p.extend_generative(
                    budget, cfg.weight, data, likelihood, rng.child(0, stage, c)
                )
            p.log_weight += delta
        log_w = [p.log_weight for p in particles]
        log_total = _logsumexp(log_w)
        if log_total == -math.inf:
            raise AllWeightsZero("all particle weights underflowed")
        if C > 1:
            probs = np.exp(np.array(log_w) - log_total)
            probs /= probs.sum()
            res_rng = rng.child(1, stage)
            new = [particles[0]]
            for _ in range(1, C):
                new.append(particles[res_rng.choice_weighted(probs)].copy())
            particles = new
        reset = log_total - math.log(C)
        for p in particles:
            p.log_weight = reset
    # terminal draw from the weighted particle set
    log_w = np.array([p.log_weight for p in particles])
    probs = np.exp(log_w - _logsumexp(list(log_w)))
    probs /= probs.sum()
    idx = rng.child(2).choice_weighted(probs)
    tree = particles[idx].to_tree(domain, budget)
    if return_particles:
        return tree, particles
    return tree


def gibbs_run(
    data,
    likelihood,
    cfg: CsmcConfig,
    iterations: int,
    rng,
    domain: Optional[ConvexPolygon] = None,
    reference: Optional[BspTree] = None,
    data_update=None,
):
    """Iterated conditional-SMC: each sweep is conditioned on the
    previous draw.  ``data_update(data, tree, rng)`` runs between sweeps
    (latent-coordinate MH for the relational model) and returns the new
    data binding.  Yields (iteration, tree, data, train_log_lik).
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if reference is None:
        if domain is None:
            raise ValueError("need a domain or an initial reference tree")
        from .process import sample_bsp

        reference = sample_bsp(domain, cfg.budget, cfg.weight, rng.child(0))
    for it in range(1, iterations + 1):
        tree = csmc_sweep(data, likelihood, cfg, reference, rng.child(1, it))
        if data_update is not None:
            data = data_update(data, tree, rng.child(2, it))
        loglik = log_marginal_tree(likelihood, tree, data)
        yield it, tree, data, loglik
        reference = tree
