"""Statistical harness for the restriction self-consistency property.

Restricting a realization on the domain to a sub-polygon must be
distributed like a realization sampled directly on the sub-polygon.
The harness compares the two arms with a two-sample chi-squared test on
leaf-count histograms and a two-sample KS test on cut counts, and can
deliberately break the restriction (dropping crossing cuts) to verify
its own sensitivity.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from .process import restrict, sample_bsp


def two_sample_count_test(a, b, min_expected=5.0):
    """Chi-squared two-sample test on integer count data.

    Builds a 2 x B contingency table over observed values, merging tail
    bins until every expected cell count reaches ``min_expected``.
    """
    a = np.asarray(a, dtype=int)
    b = np.asarray(b, dtype=int)
    hi = int(max(a.max(), b.max()))
    ha = np.bincount(a, minlength=hi + 1).astype(float)
    hb = np.bincount(b, minlength=hi + 1).astype(float)
    cols = [(ha[v], hb[v]) for v in range(hi + 1)]
    # greedy merge of adjacent low-mass columns
    merged = []
    acc = [0.0, 0.0]
    total = ha.sum() + hb.sum()
    for ca, cb in cols:
        acc[0] += ca
        acc[1] += cb
        if (acc[0] + acc[1]) * min(ha.sum(), hb.sum()) / total >= min_expected:
            merged.append(tuple(acc))
            acc = [0.0, 0.0]
    if acc[0] + acc[1] > 0:
        if merged:
            last = merged.pop()
            merged.append((last[0] + acc[0], last[1] + acc[1]))
        else:
            merged.append(tuple(acc))
    table = np.array(merged).T
    if table.shape[1] < 2:
        return 1.0  # distributions fully overlap in one bin
    _, p, _, _ = stats.chi2_contingency(table)
    return float(p)


def run_consistency(domain, sub, w, budget, runs, rng, broken=False, significance=0.01):
    """Two-sample restrict-vs-direct comparison.

    Arm one samples on ``domain`` and restricts to ``sub``; arm two
    samples on ``sub`` directly.  ``broken=True`` drops crossing cuts in
    the restriction (negative control).  Returns a dict with p-values
    and a pass flag at the given significance level.
    """
    restricted = np.empty(runs, dtype=int)
    direct = np.empty(runs, dtype=int)
    for i in range(runs):
        tree = sample_bsp(domain, budget, w, rng.child(0, i))
        restricted[i] = restrict(tree, sub, _broken_skip_crossing=broken).num_cuts
        direct[i] = sample_bsp(sub, budget, w, rng.child(1, i)).num_cuts
    p_leaf = two_sample_count_test(restricted + 1, direct + 1)
    p_cut = float(stats.ks_2samp(restricted, direct, method="asymp").pvalue)
    return {
        "runs": runs,
        "leaf_count_chi2_p": p_leaf,
        "cut_count_ks_p": p_cut,
        "significance": significance,
        "passed": bool(p_leaf > significance and p_cut > significance),
        "mean_cuts_restricted": float(restricted.mean()),
        "mean_cuts_direct": float(direct.mean()),
    }
