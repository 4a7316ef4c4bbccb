"""Temporal-dynamics feature vectors.

An editor at time-point t is described by, for each window length w in an
exponentially spaced series, the number of edits and the number of
distinct edited articles in [t - w, t), plus the log-scaled tenure
(time between first and last edit before t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .eventlog import EditorHistory, MonthPoint

# Window lengths in months: doubling from 1/16 to 4, then tripling to 108.
# 12 appears so that the one-year activity window is itself a feature.
DEFAULT_WINDOWS = (
    1 / 16,
    1 / 8,
    1 / 4,
    1 / 2,
    1.0,
    2.0,
    4.0,
    12.0,
    36.0,
    108.0,
)


@dataclass(frozen=True)
class PeriodSeries:
    """Ascending window lengths plus a cap applied at use time.

    The stored windows are never altered; `effective_windows` clips each
    one to the cap, so a cap shorter than a window shortens its reach
    without changing the series shape.
    """

    windows: tuple[float, ...]
    cap: float

    def __post_init__(self):
        if not self.windows:
            raise ValueError("period series needs at least one window")
        if any(w <= 0 for w in self.windows):
            raise ValueError(f"windows must be positive: {self.windows}")
        if any(b <= a for a, b in zip(self.windows, self.windows[1:])):
            raise ValueError(f"windows must be strictly ascending: {self.windows}")
        if not self.cap > 0:
            raise ValueError(f"cap must be positive, got {self.cap!r}")

    def __len__(self) -> int:
        return len(self.windows)

    @property
    def effective_windows(self) -> tuple[float, ...]:
        return tuple(min(w, self.cap) for w in self.windows)


def default_periods(cap: float) -> PeriodSeries:
    """The standard 10-window series under the given cap."""
    return PeriodSeries(DEFAULT_WINDOWS, cap)


@dataclass(frozen=True)
class FeatureVector:
    """Per-window edit and distinct-article counts plus log tenure.

    Component order in `as_array` is all edit counts, then all article
    counts, then log_tenure: 2k+1 values for k windows.
    """

    edits_per_window: tuple[int, ...]
    articles_per_window: tuple[int, ...]
    log_tenure: float

    @property
    def width(self) -> int:
        return 2 * len(self.edits_per_window) + 1

    def as_array(self) -> np.ndarray:
        return np.array(
            self.edits_per_window + self.articles_per_window + (self.log_tenure,),
            dtype=np.float64,
        )


def window_counts(
    history: EditorHistory, t: MonthPoint, window: float
) -> tuple[int, int]:
    """Edits and distinct articles with time in the half-open [t - window, t)."""
    if not window > 0:
        raise ValueError(f"window must be positive, got {window!r}")
    times = history.times
    lo, hi = np.searchsorted(times, [t - window, t], side="left")
    if hi == lo:
        return 0, 0
    articles = history.article_ids[lo:hi]
    return int(hi - lo), int(np.unique(articles).size)


def featurize(
    history: EditorHistory, t: MonthPoint, periods: PeriodSeries
) -> FeatureVector:
    """Feature vector for an editor as of time t.

    Only events strictly before t count; the history must contain at least
    one such event (filter by activity first).
    """
    times = history.times
    cut = int(np.searchsorted(times, t, side="left"))
    if cut == 0:
        raise ValueError(f"editor {history.user_id} has no events before t={t}")
    edits = []
    articles = []
    for w in periods.effective_windows:
        e, a = window_counts(history, t, w)
        edits.append(e)
        articles.append(a)
    tenure = float(times[cut - 1] - times[0])
    return FeatureVector(tuple(edits), tuple(articles), math.log1p(tenure))


def feature_matrix(
    rows: Sequence[tuple[int, FeatureVector]],
) -> tuple[np.ndarray, np.ndarray]:
    """Stack (user_id, vector) pairs into (user_ids, X) arrays."""
    if not rows:
        return np.empty(0, dtype=np.int64), np.empty((0, 0))
    user_ids = np.array([uid for uid, _ in rows], dtype=np.int64)
    X = np.vstack([fv.as_array() for _, fv in rows])
    return user_ids, X


def feature_header(k: int) -> str:
    names = [f"e_{j}" for j in range(1, k + 1)]
    names += [f"a_{j}" for j in range(1, k + 1)]
    names.append("log_tenure")
    return "user_id," + ",".join(names)


def write_feature_matrix(
    rows: Iterable[tuple[int, FeatureVector]], dest: IO[str]
) -> None:
    """CSV export `user_id, e_1..e_k, a_1..a_k, log_tenure` for inspection."""
    rows = list(rows)
    if not rows:
        raise ValueError("no feature rows to write")
    k = len(rows[0][1].edits_per_window)
    dest.write(feature_header(k) + "\n")
    for uid, fv in rows:
        counts = ",".join(str(c) for c in fv.edits_per_window + fv.articles_per_window)
        dest.write(f"{uid},{counts},{fv.log_tenure!r}\n")
