"""Independent reference implementations the test suite checks against.

Everything here deliberately avoids the library's own code paths: calendar
arithmetic goes through datetime/Fraction, interval counts through plain
list scans, and the stump search through exhaustive enumeration.
"""

from __future__ import annotations

import calendar
from datetime import date, datetime
from fractions import Fraction

import numpy as np


def month_point_oracle(ts: str, epoch: date) -> Fraction:
    """Exact rational month-point via datetime parsing and Fraction math."""
    when = datetime.strptime(ts, "%Y-%m-%d %H:%M:%S")
    whole = (when.year - epoch.year) * 12 + (when.month - epoch.month)
    month_start = when.replace(day=1, hour=0, minute=0, second=0)
    elapsed = int((when - month_start).total_seconds())
    days = calendar.monthrange(when.year, when.month)[1]
    fraction = Fraction(elapsed, days * 86400)
    epoch_days = calendar.monthrange(epoch.year, epoch.month)[1]
    epoch_fraction = Fraction((epoch.day - 1) * 86400, epoch_days * 86400)
    return whole + fraction - epoch_fraction


def group_and_sort_oracle(events):
    """Brute-force history construction: group by user, sort by time."""
    users = sorted({e.user_id for e in events})
    return {
        uid: sorted((e for e in events if e.user_id == uid), key=lambda e: e.time)
        for uid in users
    }


def window_counts_oracle(events, t, window):
    """Plain scan over the event list for the half-open window [t - w, t)."""
    inside = [e for e in events if t - window <= e.time < t]
    return len(inside), len({e.article_id for e in inside})


def interval_count_oracle(events, start, end):
    return sum(1 for e in events if start <= e.time < end)


def featurize_oracle(events, t, windows, cap):
    """Per-window scan plus tenure over events strictly before t."""
    edits = []
    articles = []
    for w in windows:
        e, a = window_counts_oracle(events, t, min(w, cap))
        edits.append(e)
        articles.append(a)
    past = sorted(e.time for e in events if e.time < t)
    log_tenure = float(np.log1p(past[-1] - past[0]))
    return edits, articles, log_tenure


def rmsle_oracle(pred: dict, actual: dict) -> float:
    """Straightforward re-implementation of the evaluation metric."""
    keys = sorted(pred)
    p = np.array([pred[k] for k in keys], dtype=float)
    a = np.array([actual[k] for k in keys], dtype=float)
    return float(np.sqrt(np.mean((np.log(1.0 + p) - np.log(1.0 + a)) ** 2)))


def stump_oracle(X, y, min_samples_leaf):
    """Exhaustive single-split search by direct SSE reduction.

    Returns (feature, threshold, left_mean, right_mean) for the residuals
    y - mean(y), or None when no feasible split improves the fit.  Ties are
    broken toward the lowest feature index, then the lowest threshold, by
    replacing the incumbent only on strict improvement.
    """
    X = np.asarray(X, dtype=float)
    r = np.asarray(y, dtype=float) - np.mean(y)
    n = len(r)
    sse_parent = float(np.sum((r - r.mean()) ** 2))
    best = None
    best_gain = 0.0
    for j in range(X.shape[1]):
        values = np.unique(X[:, j])
        for lo, hi in zip(values, values[1:]):
            threshold = lo + (hi - lo) / 2.0
            if not lo < threshold:
                threshold = hi
            mask = X[:, j] < threshold
            left = r[mask]
            right = r[~mask]
            if len(left) < min_samples_leaf or len(right) < min_samples_leaf:
                continue
            sse = float(np.sum((left - left.mean()) ** 2))
            sse += float(np.sum((right - right.mean()) ** 2))
            gain = sse_parent - sse
            if gain > best_gain:
                best_gain = gain
                best = (j, float(threshold), float(left.mean()), float(right.mean()))
    return best


def tree_walk_oracle(model, X):
    """Per-row, per-node ensemble evaluation independent of the library's
    vectorized prediction path."""
    X = np.asarray(X, dtype=float)
    out = []
    for row in X:
        score = model.base_score
        for tree in model.trees:
            node = tree
            while hasattr(node, "feature_index"):
                if row[node.feature_index] < node.threshold:
                    node = node.left
                else:
                    node = node.right
            score += model.shrinkage * node.value
        out.append(score)
    return np.array(out)
