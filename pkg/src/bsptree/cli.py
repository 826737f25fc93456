"""Batch experiment driver.

Subcommands: sample | toy | relational | consistency | density.
Every command is deterministic given (config, seed): reruns produce
byte-identical files regardless of the --threads setting (parallelism,
where used, never changes random-stream assignment).

Exit codes: 0 success, 1 config error, 2 data error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from .consistency import run_consistency
from .errors import (
    AllWeightsZero,
    EnvelopeViolation,
    GeometryError,
    QuadratureFailure,
    RunawayProcess,
    SingleClass,
    SubdomainNotContained,
)
from .geometry import ConvexPolygon
from .inference import CsmcConfig, DirichletMultinomial, PointData, gibbs_run
from .measure import (
    AxisAligned,
    Uniform,
    _atoms,
    direction_density,
    mondrian_style,
    weight_from_json,
)
from .process import locate_many, sample_bsp
from .relational import (
    TEST,
    RelationalDataset,
    auc,
    fit_relational,
    generate_relational,
    generate_toy,
    holdout_mask,
    predict,
    read_edge_list,
    read_mask,
    write_predictions_csv,
)
from .rng import RngStream

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of calling sys.exit."""

    def error(self, message):
        raise _ConfigError(message)


# ---------------------------------------------------------------------------
# shared plumbing


def _parse_domain(spec):
    if spec == "unit-square":
        return ConvexPolygon.unit_square()
    try:
        with open(spec) as fh:
            return ConvexPolygon.from_json(json.load(fh))
    except OSError as e:
        raise _ConfigError(f"cannot read domain file {spec!r}: {e}")
    except (ValueError, KeyError, GeometryError) as e:
        raise ValueError(f"bad domain file {spec!r}: {e}")


def _parse_weight(spec):
    if spec == "uniform":
        return Uniform()
    if spec == "axis":
        return AxisAligned()
    if spec == "mondrian":
        return mondrian_style()
    try:
        with open(spec) as fh:
            return weight_from_json(json.load(fh))
    except OSError as e:
        raise _ConfigError(f"cannot read weight file {spec!r}: {e}")
    except (ValueError, KeyError) as e:
        raise ValueError(f"bad weight file {spec!r}: {e}")


def _outdir(args):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_text(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _tree_ref(out, tree):
    """Content-addressed tree file; returns the relative reference."""
    payload = tree.to_json_str()
    digest = hashlib.sha256(payload.encode()).hexdigest()[:16]
    tdir = os.path.join(out, "trees")
    os.makedirs(tdir, exist_ok=True)
    ref = os.path.join("trees", f"{digest}.json")
    path = os.path.join(out, ref)
    if not os.path.exists(path):
        _write_text(path, payload + "\n")
    return ref


def _require_seed(args):
    if args.seed is None:
        raise _ConfigError("--seed is required for this command")


# ---------------------------------------------------------------------------
# sample


def cmd_sample(args):
    _require_seed(args)
    domain = _parse_domain(args.domain)
    w = _parse_weight(args.weight)
    if args.budget <= 0:
        raise _ConfigError("--budget must be positive")
    out = _outdir(args)
    tree = sample_bsp(domain, args.budget, w, RngStream(args.seed))
    _write_text(os.path.join(out, "tree.json"), tree.to_json_str() + "\n")
    _write_text(os.path.join(out, "tree.svg"), tree.to_svg())
    pe_sum = tree.perimeter_sum()
    print(f"leaves {tree.num_cuts + 1}")
    print(f"perimeter_sum {pe_sum!r}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# toy


def _toy_points(preset, rng):
    gen = rng.generator
    if preset == "case1":
        # dense uniform grid on the unit square
        g = np.linspace(0.02, 0.98, 33)
        xx, yy = np.meshgrid(g, g)
        return np.column_stack([xx.ravel(), yy.ravel()])
    centers = np.array(
        [[0.2, 0.2], [0.8, 0.2], [0.5, 0.5], [0.2, 0.8], [0.8, 0.8]]
    )
    pts = []
    for c in centers:
        pts.append(gen.normal(loc=c, scale=0.07, size=(200, 2)))
    noise = 100 if preset == "case2" else 600
    pts.append(gen.uniform(size=(noise, 2)))
    pts = np.clip(np.concatenate(pts), 0.0, 1.0)
    return pts


_TOY_BUDGETS = {"case1": 10.0, "case2": 3.0, "case3": 3.0}


def cmd_toy(args):
    _require_seed(args)
    out = _outdir(args)
    budget = args.budget if args.budget is not None else _TOY_BUDGETS[args.preset]
    if budget <= 0:
        raise _ConfigError("--budget must be positive")
    alpha = (args.alpha,) * args.labels
    root = RngStream(args.seed)
    domain = ConvexPolygon.unit_square()
    pts = _toy_points(args.preset, root.child(0))
    dataset, planted = generate_toy(domain, budget, Uniform(), alpha, pts, root.child(1))

    with open(os.path.join(out, "dataset.csv"), "w") as fh:
        fh.write("x,y,label\n")
        for (x, y), z in zip(dataset.points, dataset.labels):
            fh.write(f"{float(x)!r},{float(y)!r},{int(z)}\n")
    _write_text(os.path.join(out, "planted.svg"), planted.to_svg())

    likelihood = DirichletMultinomial(alpha)
    glob = np.bincount(dataset.labels, minlength=args.labels)
    baseline = float(likelihood.block_log_evidence(glob))
    if not args.fit:
        _write_json(
            os.path.join(out, "metrics.json"),
            {"points": int(len(dataset.labels)), "single_block_loglik": baseline},
        )
        print(f"points {len(dataset.labels)}")
        return EXIT_OK

    data = PointData(points=dataset.points, values=dataset.labels)
    cfg = CsmcConfig(num_particles=args.particles, budget=budget, weight=Uniform())
    tree = None
    loglik = baseline
    with open(os.path.join(out, "trace.jsonl"), "w") as trace:
        for it, tree, _, loglik in gibbs_run(
            data, likelihood, cfg, args.iterations, root.child(2), domain=domain
        ):
            rec = {
                "iter": it,
                "loglik": loglik,
                "num_blocks": tree.num_cuts + 1,
                "tree_ref": _tree_ref(out, tree),
            }
            trace.write(json.dumps(rec, sort_keys=True) + "\n")

    snap = tree.snapshot(budget)
    ids = locate_many(snap, dataset.points)
    pred = np.empty(len(ids), dtype=np.int64)
    a = np.asarray(alpha)
    for bid, _ in snap.blocks:
        sel = ids == bid
        counts = np.bincount(dataset.labels[sel], minlength=args.labels)
        pred[sel] = int(np.argmax(a + counts))
    accuracy = float(np.mean(pred == dataset.labels))
    _write_text(os.path.join(out, "partition.svg"), tree.to_svg())
    metrics = {
        "accuracy": accuracy,
        "train_loglik": loglik,
        "num_blocks": tree.num_cuts + 1,
        "single_block_loglik": baseline,
    }
    _write_json(os.path.join(out, "metrics.json"), metrics)
    print(f"accuracy {accuracy!r}")
    print(f"train_loglik {loglik!r}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# relational


def cmd_relational(args):
    _require_seed(args)
    out = _outdir(args)
    w = _parse_weight(args.weight)
    if args.budget <= 0:
        raise _ConfigError("--budget must be positive")
    root = RngStream(args.seed)

    if args.edges is not None:
        entries = read_edge_list(args.edges)
        n = entries.shape[0]
        if args.mask is not None:
            mask = read_mask(args.mask, n)
        else:
            mask = holdout_mask(n, args.holdout, root.child(10))
        data = RelationalDataset(entries=entries, mask=mask)
    else:
        data, _, planted = generate_relational(
            args.n, args.budget, w, args.alpha0, args.beta0, root.child(10)
        )
        mask = holdout_mask(args.n, args.holdout, root.child(11))
        data = RelationalDataset(entries=data.entries, mask=mask)
        _write_text(os.path.join(out, "planted.svg"), planted.to_svg())

    test_labels = data.entries[data.mask == TEST]
    if test_labels.size and (test_labels.min() == test_labels.max()):
        raise SingleClass("held-out entries contain a single class")

    cfg = CsmcConfig(num_particles=args.particles, budget=args.budget, weight=w)
    tree = coords = None
    loglik = 0.0
    with open(os.path.join(out, "trace.jsonl"), "w") as trace:
        for it, tree, coords, loglik in fit_relational(
            data, cfg, args.iterations, root.child(12), args.alpha0, args.beta0
        ):
            rec = {
                "iter": it,
                "loglik": loglik,
                "num_blocks": tree.num_cuts + 1,
                "tree_ref": _tree_ref(out, tree),
            }
            trace.write(json.dumps(rec, sort_keys=True) + "\n")

    scores = predict(data, coords, tree, args.alpha0, args.beta0)
    write_predictions_csv(os.path.join(out, "predictions.csv"), data, scores)
    test = data.mask == TEST
    if test.any():
        metric_auc = auc(scores[test], data.entries[test])
    else:
        metric_auc = auc(scores, data.entries)
    metrics = {
        "auc": metric_auc,
        "train_loglik": loglik,
        "num_blocks": tree.num_cuts + 1,
    }
    _write_json(os.path.join(out, "metrics.json"), metrics)
    print(f"auc {metric_auc!r}")
    print(f"train_loglik {loglik!r}")
    print(f"num_blocks {tree.num_cuts + 1}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# consistency


def cmd_consistency(args):
    _require_seed(args)
    out = _outdir(args)
    domain = _parse_domain(args.domain)
    w = _parse_weight(args.weight)
    if args.budget <= 0:
        raise _ConfigError("--budget must be positive")
    x0, y0, x1, y1 = args.sub
    try:
        sub = ConvexPolygon.rectangle(x0, y0, x1, y1)
    except (ValueError, GeometryError) as e:
        raise _ConfigError(f"bad --sub rectangle: {e}")
    try:
        report = run_consistency(
            domain,
            sub,
            w,
            args.budget,
            args.runs,
            RngStream(args.seed),
            broken=args.broken,
            significance=args.significance,
        )
    except SubdomainNotContained as e:
        raise _ConfigError(str(e))
    _write_json(os.path.join(out, "consistency.json"), report)
    print(f"leaf_count_chi2_p {report['leaf_count_chi2_p']!r}")
    print(f"cut_count_ks_p {report['cut_count_ks_p']!r}")
    print("PASS" if report["passed"] else "FAIL")
    return EXIT_OK


# ---------------------------------------------------------------------------
# density


def cmd_density(args):
    out = _outdir(args)
    domain = _parse_domain(args.domain)
    w = _parse_weight(args.weight)
    thetas = np.pi * np.arange(1, args.grid + 1) / args.grid
    atoms = {t for t, _ in _atoms(w, domain)}
    with open(os.path.join(out, "density.csv"), "w") as fh:
        fh.write("theta,density,kind\n")
        for t in sorted(atoms):
            fh.write(f"{float(t)!r},{float(direction_density(domain, w, t))!r},atom\n")
        for t in thetas:
            t = float(t)
            if t in atoms:
                # the continuous part at an atom location
                dens = 0.0 if isinstance(w, AxisAligned) else None
                if dens is None:
                    eps = 1e-9
                    dens = direction_density(domain, w, t - eps)
            else:
                dens = direction_density(domain, w, t)
            fh.write(f"{t!r},{float(dens)!r},density\n")
    if args.samples > 0:
        _require_seed(args)
        if args.budget <= 0:
            raise _ConfigError("--budget must be positive")
        root = RngStream(args.seed)
        for k in range(args.samples):
            tree = sample_bsp(domain, args.budget, w, root.child(k))
            _write_text(os.path.join(out, f"partition_{k}.svg"), tree.to_svg())
    print(f"grid {args.grid}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring


def _add_common(p):
    p.add_argument("--seed", type=int, default=None, help="root random seed")
    p.add_argument("--out", default=None, help="output directory (default: cwd)")
    p.add_argument("--config", default=None, help="JSON config file; flags override")
    p.add_argument("--threads", type=int, default=1, help="worker hint; never affects output bytes")


def build_parser():
    parser = _Parser(prog="bsp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw one partition and export JSON + SVG")
    _add_common(p)
    p.add_argument("--domain", default="unit-square")
    p.add_argument("--weight", default="uniform")
    p.add_argument("--budget", type=float, default=1.0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("toy", help="synthesize and fit labelled toy data")
    _add_common(p)
    p.add_argument("--preset", choices=["case1", "case2", "case3"], default="case2")
    p.add_argument("--budget", type=float, default=None, help="override the preset budget")
    p.add_argument("--labels", type=int, default=4)
    p.add_argument("--alpha", type=float, default=1.0, help="symmetric Dirichlet parameter")
    p.add_argument("--particles", type=int, default=10)
    p.add_argument("--iterations", type=int, default=20)
    p.add_argument("--fit", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("relational", help="fit the relational model")
    _add_common(p)
    p.add_argument("--n", type=int, default=100, help="nodes for synthetic data")
    p.add_argument("--edges", default=None, help="edge-list file instead of synthesis")
    p.add_argument("--mask", default=None, help="held-out entry list")
    p.add_argument("--holdout", type=float, default=0.1)
    p.add_argument("--weight", default="uniform")
    p.add_argument("--budget", type=float, default=3.0)
    p.add_argument("--alpha0", type=float, default=0.5)
    p.add_argument("--beta0", type=float, default=0.5)
    p.add_argument("--particles", type=int, default=10)
    p.add_argument("--iterations", type=int, default=50)
    p.set_defaults(func=cmd_relational)

    p = sub.add_parser("consistency", help="restrict-vs-direct statistical harness")
    _add_common(p)
    p.add_argument("--domain", default="unit-square")
    p.add_argument("--weight", default="uniform")
    p.add_argument("--budget", type=float, default=2.0)
    p.add_argument("--runs", type=int, default=2000)
    p.add_argument("--sub", type=float, nargs=4, default=[0.2, 0.2, 0.8, 0.8],
                   metavar=("X0", "Y0", "X1", "Y1"))
    p.add_argument("--significance", type=float, default=0.01)
    p.add_argument("--broken", action="store_true",
                   help="deliberately drop crossing cuts (negative control)")
    p.set_defaults(func=cmd_consistency)

    p = sub.add_parser("density", help="export the direction-density grid")
    _add_common(p)
    p.add_argument("--domain", default="unit-square")
    p.add_argument("--weight", default="uniform")
    p.add_argument("--grid", type=int, default=4096)
    p.add_argument("--samples", type=int, default=0, help="also export N sampled partitions")
    p.add_argument("--budget", type=float, default=2.0)
    p.set_defaults(func=cmd_density)

    return parser


def _apply_config(args, argv):
    """Overlay config-file values onto parsed args; explicit flags win."""
    if args.config is None:
        return
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except OSError as e:
        raise _ConfigError(f"cannot read config file {args.config!r}: {e}")
    except json.JSONDecodeError as e:
        raise _ConfigError(f"bad config file {args.config!r}: {e}")
    if not isinstance(cfg, dict):
        raise _ConfigError(f"config file {args.config!r} must hold a JSON object")
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-")
        on_cli = any(
            a == flag or a == f"--no-{key}" or a.startswith(flag + "=") for a in argv
        )
        if not on_cli:
            setattr(args, key, value)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        _apply_config(args, argv)
        return args.func(args)
    except _ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError, SingleClass) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (QuadratureFailure, RunawayProcess, AllWeightsZero, EnvelopeViolation) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
