"""Reproducible random streams.

Built on numpy's Philox counter-based bit generator.  Streams are
identified by a root seed plus a path of non-negative integers; the path
is mapped to a ``SeedSequence`` spawn key, so any stream can be derived
directly without consuming state from its parent.  Results are therefore
independent of worker count and evaluation order.

Typical use::

    root = RngStream(seed=7)
    tree_rng = root.child(0)                 # stream for tree sampling
    particle_rng = root.child(1, stage, c)   # keyed sub-stream
"""

from __future__ import annotations

import numpy as np


class RngStream:
    """A named, splittable random stream.

    ``child(*path)`` derives an independent stream; ``generator`` is the
    underlying ``numpy.random.Generator`` for drawing.
    """

    __slots__ = ("seed", "path", "_gen")

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def child(self, *path: int) -> "RngStream":
        return RngStream(self.seed, self.path + tuple(path))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    # thin draw helpers so callers rarely touch .generator directly

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def random(self, size=None):
        return self._gen.random(size)

    def exponential(self, scale=1.0, size=None):
        return self._gen.exponential(scale, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def choice_weighted(self, weights) -> int:
        """Index drawn proportionally to non-negative ``weights``."""
        w = np.asarray(weights, dtype=float)
        total = w.sum()
        u = self._gen.random() * total
        acc = 0.0
        for i, wi in enumerate(w):
            acc += wi
            if u < acc:
                return i
        return len(w) - 1

    def __repr__(self):
        return f"RngStream(seed={self.seed}, path={self.path})"
