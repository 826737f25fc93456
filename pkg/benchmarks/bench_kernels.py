"""Compare the compiled and pure-python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [repeats]

Times the hot kernels on a pool of random polygons and reports the
per-call cost and speedup.  Also times an end-to-end partition sample
with each backend forced via the internal backend selector.
"""

import sys
import time

import numpy as np

sys.path.insert(0, "tests")
from conftest import random_convex_polygon  # noqa: E402

from bsptree._kernels import get_backend  # noqa: E402


def bench(label, fn, args_list, repeats):
    t0 = time.perf_counter()
    for _ in range(repeats):
        for args in args_list:
            fn(*args)
    dt = time.perf_counter() - t0
    calls = repeats * len(args_list)
    return dt / calls


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 200
    gen = np.random.default_rng(0)
    polys = [random_convex_polygon(gen).vertices for _ in range(100)]
    thetas = gen.uniform(0, np.pi, size=64)
    ct, st = np.cos(thetas), np.sin(thetas)
    pts = gen.uniform(-2, 2, size=(256, 2))

    cases = []
    for v in polys:
        d = v @ np.array([ct[0], st[0]])
        off = 0.5 * (d.min() + d.max())
        cases.append((v, d, off))

    suites = {
        "perimeter": [(v,) for v in polys],
        "area": [(v,) for v in polys],
        "diameter": [(v,) for v in polys],
        "projection_lengths": [(v, ct, st) for v in polys],
        "contains_many": [(v, pts, 1e-9) for v in polys],
        "split": [(v, ct[0], st[0], off, 1e-9) for v, _, off in cases],
    }

    backends = {}
    for name in ("cython", "python"):
        try:
            backends[name] = get_backend(name)
        except Exception:
            print(f"backend {name!r} unavailable, skipping")

    print(f"{'kernel':<20}" + "".join(f"{n:>14}" for n in backends) + f"{'speedup':>10}")
    for kernel, args_list in suites.items():
        times = {}
        for name, mod in backends.items():
            times[name] = bench(kernel, getattr(mod, kernel), args_list, repeats)
        row = f"{kernel:<20}" + "".join(
            f"{times[n] * 1e6:>12.2f}us" for n in backends
        )
        if len(times) == 2:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)

    # end-to-end: sampling one partition exercises every kernel
    import importlib
    import os

    for name, env in (("cython", "0"), ("python", "1")):
        if name not in backends:
            continue
        os.environ["BSPTREE_PURE"] = env
        import bsptree._kernels as _k

        importlib.reload(_k)
        import bsptree.geometry as _g
        import bsptree.measure as _m
        import bsptree.process as _p

        importlib.reload(_g)
        importlib.reload(_m)
        importlib.reload(_p)
        from bsptree.rng import RngStream

        sq = _g.ConvexPolygon.unit_square()
        t0 = time.perf_counter()
        n = 50
        for i in range(n):
            _p.sample_bsp(sq, 4.0, _m.Uniform(), RngStream(7).child(i))
        dt = (time.perf_counter() - t0) / n
        print(f"sample_bsp tau=4 [{name}]: {dt * 1e3:.2f} ms/tree")
    os.environ.pop("BSPTREE_PURE", None)


if __name__ == "__main__":
    main()
