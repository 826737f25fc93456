"""Relational model on partitions of the unit square.

Nodes get latent coordinates in [0, 1]; entry (i, j) of the binary
relation matrix lives at the planar point (xi_i, eta_j) and is Bernoulli
with a block-constant rate.  Rates are collapsed under a Beta prior
throughout: coordinate updates and predictions use block counts, never
sampled rates.  Held-out (test) and missing entries are excluded from
all counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import rankdata

from .errors import SingleClass
from .geometry import ConvexPolygon
from .inference import BetaBernoulli, CsmcConfig, PointData, gibbs_run
from .process import BspTree, locate_many, locate_many_tree, sample_bsp

TRAIN, TEST, MISSING = 0, 1, 2


@dataclass(frozen=True)
class RelationalDataset:
    entries: np.ndarray  # (n, n) int8 in {0, 1}
    mask: np.ndarray  # (n, n) int8 in {TRAIN, TEST, MISSING}

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def test_fraction(self):
        return float((self.mask == TEST).mean())


@dataclass(frozen=True)
class Coordinates:
    xi: np.ndarray
    eta: np.ndarray


@dataclass(frozen=True)
class ToyDataset:
    points: np.ndarray  # (m, 2)
    labels: np.ndarray  # (m,) ints in [0, num_labels)
    num_labels: int


# ---------------------------------------------------------------------------
# synthetic data


def generate_toy(domain, budget, w, dirichlet_alpha, points, rng):
    """Labels from a sampled partition with per-block multinomial rates."""
    points = np.asarray(points, dtype=float)
    tree = sample_bsp(domain, budget, w, rng.child(0))
    gen = rng.child(1).generator
    alpha = np.asarray(dirichlet_alpha, dtype=float)
    snap = tree.snapshot(budget)
    phis = {bid: gen.dirichlet(alpha) for bid, _ in snap.blocks}
    ids = locate_many(snap, points)
    labels = np.array(
        [gen.choice(len(alpha), p=phis[b]) for b in ids], dtype=np.int64
    )
    return ToyDataset(points=points, labels=labels, num_labels=len(alpha)), tree


def generate_relational(n, budget, w, alpha0, beta0, rng):
    """Binary relation matrix from a planted partition of the unit square."""
    if n < 2:
        raise ValueError("need at least two nodes")
    domain = ConvexPolygon.unit_square()
    tree = sample_bsp(domain, budget, w, rng.child(0))
    gen = rng.child(1).generator
    snap = tree.snapshot(budget)
    phis = {bid: gen.beta(alpha0, beta0) for bid, _ in snap.blocks}
    xi = gen.uniform(size=n)
    eta = gen.uniform(size=n)
    pts = np.column_stack(
        [np.repeat(xi, n), np.tile(eta, n)]
    )  # row-major: entry (i, j) at index i * n + j
    ids = locate_many(snap, pts)
    rates = np.array([phis[b] for b in ids]).reshape(n, n)
    entries = (gen.uniform(size=(n, n)) < rates).astype(np.int8)
    mask = np.zeros((n, n), dtype=np.int8)
    return (
        RelationalDataset(entries=entries, mask=mask),
        Coordinates(xi=xi, eta=eta),
        tree,
    )


def holdout_mask(n, fraction, rng):
    """TRAIN/TEST mask with ~``fraction`` of entries held out."""
    gen = rng.generator
    mask = np.zeros((n, n), dtype=np.int8)
    k = int(round(fraction * n * n))
    flat = gen.choice(n * n, size=k, replace=False)
    mask.reshape(-1)[flat] = TEST
    return mask


# ---------------------------------------------------------------------------
# block counts


class _BlockCounts:
    """Per-leaf train-entry counts and the entry->leaf assignment."""

    def __init__(self, data: RelationalDataset, coords: Coordinates, tree: BspTree):
        self.tree = tree
        self.snap = tree.snapshot(tree.budget)
        self.leaf_ids = np.array([bid for bid, _ in self.snap.blocks])
        # dense id -> compact index lookup (leaf ids are at most 2*cuts+2)
        self._k_of = np.full(int(self.leaf_ids.max()) + 1, -1, dtype=np.int64)
        self._k_of[self.leaf_ids] = np.arange(len(self.leaf_ids))
        self.id_to_k = {bid: k for k, bid in enumerate(self.leaf_ids)}
        n = data.n
        pts = np.column_stack(
            [np.repeat(coords.xi, n), np.tile(coords.eta, n)]
        )
        self.assign = self._k_of[locate_many_tree(tree, pts)].reshape(n, n)
        train = data.mask == TRAIN
        k = len(self.leaf_ids)
        self.n1 = np.bincount(
            self.assign[train & (data.entries == 1)], minlength=k
        ).astype(float)
        self.n0 = np.bincount(
            self.assign[train & (data.entries == 0)], minlength=k
        ).astype(float)

    def locate_k(self, pts):
        return self._k_of[locate_many_tree(self.tree, pts)]


def _log_ev(n1, n0, a, b):
    """Vectorized collapsed Beta-Bernoulli block evidence."""
    return (
        gammaln(a + n1)
        + gammaln(b + n0)
        - gammaln(a + b + n0 + n1)
        - (gammaln(a) + gammaln(b) - gammaln(a + b))
    )


# ---------------------------------------------------------------------------
# coordinate updates


def mh_update_coordinates(
    data: RelationalDataset,
    coords: Coordinates,
    tree: BspTree,
    likelihood: BetaBernoulli,
    rng,
) -> Coordinates:
    """One Metropolis sweep over all row then all column coordinates.

    Proposals are uniform on [0, 1]; acceptance uses the collapsed
    evidence ratio of the proposing node's training entries, with the
    node's own contribution removed from the block counts.
    """
    a, b = likelihood.alpha0, likelihood.beta0
    n = data.n
    xi = coords.xi.copy()
    eta = coords.eta.copy()
    bc = _BlockCounts(data, Coordinates(xi, eta), tree)
    K = len(bc.leaf_ids)
    gen = rng.generator

    def delta(base1, base0, add1, add0):
        return (_log_ev(base1 + add1, base0 + add0, a, b) - _log_ev(base1, base0, a, b)).sum()

    for axis in (0, 1):  # rows (xi), then columns (eta)
        for i in range(n):
            if axis == 0:
                sel = data.mask[i, :] == TRAIN
                if not sel.any():
                    xi[i] = gen.uniform()
                    continue
                vals = data.entries[i, sel]
                old_k = bc.assign[i, sel]
                prop = gen.uniform()
                pts = np.column_stack([np.full(sel.sum(), prop), eta[sel]])
            else:
                sel = data.mask[:, i] == TRAIN
                if not sel.any():
                    eta[i] = gen.uniform()
                    continue
                vals = data.entries[sel, i]
                old_k = bc.assign[sel, i]
                prop = gen.uniform()
                pts = np.column_stack([xi[sel], np.full(sel.sum(), prop)])
            new_k = bc.locate_k(pts)
            old1 = np.bincount(old_k[vals == 1], minlength=K).astype(float)
            old0 = np.bincount(old_k[vals == 0], minlength=K).astype(float)
            new1 = np.bincount(new_k[vals == 1], minlength=K).astype(float)
            new0 = np.bincount(new_k[vals == 0], minlength=K).astype(float)
            base1 = bc.n1 - old1
            base0 = bc.n0 - old0
            log_alpha = delta(base1, base0, new1, new0) - delta(base1, base0, old1, old0)
            if log_alpha >= 0.0 or gen.uniform() < np.exp(log_alpha):
                if axis == 0:
                    xi[i] = prop
                    bc.assign[i, sel] = new_k
                else:
                    eta[i] = prop
                    bc.assign[sel, i] = new_k
                bc.n1 = base1 + new1
                bc.n0 = base0 + new0
    return Coordinates(xi=xi, eta=eta)


# ---------------------------------------------------------------------------
# prediction and evaluation


def predict(data: RelationalDataset, coords: Coordinates, tree: BspTree, alpha0, beta0):
    """Posterior-mean link probability for every entry under one state."""
    bc = _BlockCounts(data, coords, tree)
    post = (alpha0 + bc.n1) / (alpha0 + beta0 + bc.n0 + bc.n1)
    return post[bc.assign]


def auc(scores, labels) -> float:
    """Mann-Whitney rank AUC with average ranks for ties."""
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel()
    pos = labels == 1
    n1 = int(pos.sum())
    n0 = len(labels) - n1
    if n1 == 0 or n0 == 0:
        raise SingleClass("both classes are required for AUC")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


# ---------------------------------------------------------------------------
# fitting (Algorithm: C-SMC sweep + coordinate MH per iteration)


def bind_points(data: RelationalDataset, coords: Coordinates) -> PointData:
    """Training entries as planar observations for the tree sweep."""
    n = data.n
    train = data.mask == TRAIN
    rows, cols = np.nonzero(train)
    pts = np.column_stack([coords.xi[rows], coords.eta[cols]])
    return PointData(points=pts, values=data.entries[rows, cols].astype(np.int64))


def fit_relational(
    data: RelationalDataset,
    cfg: CsmcConfig,
    iterations: int,
    rng,
    alpha0: float = 0.5,
    beta0: float = 0.5,
    init_coords: Coordinates | None = None,
):
    """Outer MCMC loop: yields (iteration, tree, coords, train_log_lik).

    Each iteration runs one conditional-SMC sweep for the tree, then a
    Metropolis sweep over all node coordinates.
    """
    likelihood = BetaBernoulli(alpha0, beta0)
    n = data.n
    if init_coords is None:
        gen = rng.child(3).generator
        init_coords = Coordinates(xi=gen.uniform(size=n), eta=gen.uniform(size=n))
    state = {"coords": init_coords}

    def data_update(_bound, tree, update_rng):
        state["coords"] = mh_update_coordinates(
            data, state["coords"], tree, likelihood, update_rng
        )
        return bind_points(data, state["coords"])

    bound = bind_points(data, init_coords)
    domain = ConvexPolygon.unit_square()
    for it, tree, bound, loglik in gibbs_run(
        bound, likelihood, cfg, iterations, rng, domain=domain, data_update=data_update
    ):
        yield it, tree, state["coords"], loglik


# ---------------------------------------------------------------------------
# edge-list files


def read_edge_list(path):
    """Binary relation from a text file: header "n <N>", then one
    "i j" (0-based) line per positive entry."""
    entries = None
    n = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if n is None:
                if len(parts) != 2 or parts[0] != "n":
                    raise ValueError(f"{path}:{lineno}: expected header 'n <N>'")
                n = int(parts[1])
                entries = np.zeros((n, n), dtype=np.int8)
                continue
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'i j'")
            i, j = int(parts[0]), int(parts[1])
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"{path}:{lineno}: index out of range")
            entries[i, j] = 1
    if n is None:
        raise ValueError(f"{path}: missing header line")
    return entries


def read_mask(path, n):
    """TEST entries from an edge-list-format file."""
    mask = np.zeros((n, n), dtype=np.int8)
    with open(path) as fh:
        header_seen = False
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if not header_seen:
                if len(parts) != 2 or parts[0] != "n":
                    raise ValueError(f"{path}:{lineno}: expected header 'n <N>'")
                if int(parts[1]) != n:
                    raise ValueError(f"{path}:{lineno}: mask size mismatch")
                header_seen = True
                continue
            i, j = int(parts[0]), int(parts[1])
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"{path}:{lineno}: index out of range")
            mask[i, j] = TEST
    return mask


def write_predictions_csv(path, data: RelationalDataset, scores):
    split_name = {TRAIN: "train", TEST: "test", MISSING: "missing"}
    with open(path, "w") as fh:
        fh.write("i,j,score,label,split\n")
        n = data.n
        for i in range(n):
            for j in range(n):
                fh.write(
                    f"{i},{j},{float(scores[i, j])!r},{int(data.entries[i, j])},"
                    f"{split_name[int(data.mask[i, j])]}\n"
                )
