"""Drift estimation, final count prediction, baselines, and RMSLE.

The regression target lives in log(1 + count) space, so the root mean
squared logarithmic error of the final counts equals the square root of
the training loss when no drift or clamping is involved.  Drift is a
single additive correction in that log space capturing how the average
activity level moves over one horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .dataset import DEFAULT_HORIZON, DEFAULT_LOOKBACK, active_editors
from .errors import DataError
from .eventlog import EditorHistory, MonthPoint
from .features import FeatureVector
from .gbt import GbtModel

DRIFT_SPACES = ("log", "raw")


@dataclass(frozen=True)
class Drift:
    """Additive correction applied to model scores, in log(1+count) units."""

    d: float


@dataclass(frozen=True)
class EvalReport:
    """RMSLE over a population, with per-editor log-space residuals."""

    epsilon: float
    n: int
    residuals: dict[int, float]

    def __str__(self) -> str:
        return f"RMSLE over {self.n} editors: {self.epsilon:.6f}"


def estimate_drift(
    histories: Mapping[int, EditorHistory],
    t_train: MonthPoint,
    *,
    horizon: float = DEFAULT_HORIZON,
    lookback: float = DEFAULT_LOOKBACK,
    space: str = "log",
) -> Drift:
    """Compare activity in [t_train - horizon, t_train) with [t_train, t_train + horizon).

    Over the editors active at t_train: in "log" space (the default) the
    drift is the difference of mean log(1 + count); in "raw" space it is
    log(1 + mean count) after minus before.
    """
    if space not in DRIFT_SPACES:
        raise ValueError(f"drift space must be one of {DRIFT_SPACES}, got {space!r}")
    active = active_editors(histories, t_train, lookback)
    if not active:
        raise DataError(f"no active editors at t_train={t_train} to estimate drift")
    before = []
    after = []
    for uid in sorted(active):
        h = histories[uid]
        before.append(h.count_in(t_train - horizon, t_train))
        after.append(h.count_in(t_train, t_train + horizon))
    if space == "log":
        d = float(np.mean(np.log1p(after)) - np.mean(np.log1p(before)))
    else:
        d = math.log1p(float(np.mean(after))) - math.log1p(float(np.mean(before)))
    return Drift(d)


def predict_counts(
    model: GbtModel,
    drift: Drift,
    rows: Sequence[tuple[int, FeatureVector]],
) -> dict[int, float]:
    """Final per-editor counts: exp(max(score + d, 0)) - 1, always >= 0."""
    result: dict[int, float] = {}
    if not rows:
        return result
    X = np.vstack([fv.as_array() for _, fv in rows])
    scores = model.predict(X)
    for (uid, _), score in zip(rows, scores):
        result[uid] = math.expm1(max(score + drift.d, 0.0))
    return result


def rmsle(pred: Mapping[int, float], actual: Mapping[int, float]) -> EvalReport:
    """Root mean squared logarithmic error (natural log) over matching keys."""
    if pred.keys() != actual.keys():
        missing = sorted(actual.keys() - pred.keys())
        extra = sorted(pred.keys() - actual.keys())
        raise ValueError(
            f"key sets differ: missing from predictions {missing[:10]}, "
            f"unexpected in predictions {extra[:10]}"
        )
    if not pred:
        raise ValueError("need at least one prediction to evaluate")
    residuals: dict[int, float] = {}
    total = 0.0
    for uid in pred:
        p = pred[uid]
        a = actual[uid]
        if not (math.isfinite(p) and p >= 0):
            raise ValueError(f"prediction for editor {uid} must be >= 0, got {p!r}")
        if not (math.isfinite(a) and a >= 0):
            raise ValueError(f"actual for editor {uid} must be >= 0, got {a!r}")
        r = math.log1p(p) - math.log1p(a)
        residuals[uid] = r
        total += r * r
    return EvalReport(math.sqrt(total / len(pred)), len(pred), residuals)


def baseline_recent5(
    histories: Mapping[int, EditorHistory],
    t: MonthPoint,
    *,
    window: float = DEFAULT_HORIZON,
    lookback: float = DEFAULT_LOOKBACK,
) -> dict[int, float]:
    """Predict each active editor's count in the last `window` months as is."""
    active = active_editors(histories, t, lookback)
    return {
        uid: float(histories[uid].count_in(t - window, t)) for uid in sorted(active)
    }


def baseline_constant(train_targets: Sequence[float]) -> float:
    """The single count minimizing squared log-space error on the training set.

    This is exp(mean(y)) - 1, the count whose log target equals the mean
    training target (also the ensemble's base score).
    """
    targets = np.asarray(train_targets, dtype=np.float64)
    if targets.size == 0:
        raise ValueError("need at least one training target")
    return float(math.expm1(float(targets.mean())))
