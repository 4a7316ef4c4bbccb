"""Self-supervised dataset construction.

Labels are obtained by shifting the prediction time-point backwards by the
horizon: editors active at t_train get a feature vector from their past
and a target y = log(1 + a) where a is the edit count actually observed
in the following horizon.  Prediction rows are the same featurization at
t_test, without labels.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, IO, Iterable, Mapping, Sequence, TypeVar

import numpy as np

from .errors import DataError
from .eventlog import EditorHistory, MonthPoint
from .features import FeatureVector, PeriodSeries, feature_header, featurize

DEFAULT_HORIZON = 5.0
DEFAULT_LOOKBACK = 12.0


@dataclass(frozen=True)
class TimeSplit:
    """Prediction time t_test with the derived training time t_test - horizon."""

    t_test: MonthPoint
    horizon: float = DEFAULT_HORIZON
    activity_lookback: float = DEFAULT_LOOKBACK

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon!r}")
        if not self.activity_lookback > 0:
            raise ValueError(
                f"activity lookback must be positive, got {self.activity_lookback!r}"
            )
        if self.t_train < self.activity_lookback:
            raise ValueError(
                f"t_train = t_test - horizon = {self.t_train} is below the "
                f"activity lookback of {self.activity_lookback} months"
            )

    @property
    def t_train(self) -> MonthPoint:
        return self.t_test - self.horizon


@dataclass(frozen=True)
class LabeledExample:
    """Feature vector plus the log-transformed future edit count."""

    user_id: int
    x: FeatureVector
    y: float
    a: int


_T = TypeVar("_T")
_U = TypeVar("_U")


def _map_ordered(fn: Callable[[_T], _U], items: Sequence[_T], threads: int) -> list[_U]:
    """Apply fn over items, optionally on a thread pool; order is preserved
    either way, so results never depend on the thread count."""
    if threads <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def active_editors(
    histories: Mapping[int, EditorHistory],
    t: MonthPoint,
    lookback: float = DEFAULT_LOOKBACK,
) -> set[int]:
    """Editors with at least one event in [t - lookback, t)."""
    if t < lookback:
        raise ValueError(f"t={t} is below the activity lookback of {lookback}")
    return {
        uid for uid, h in histories.items() if h.count_in(t - lookback, t) > 0
    }


def count_future_edits(
    history: EditorHistory, t: MonthPoint, horizon: float = DEFAULT_HORIZON
) -> int:
    """Number of events in the half-open interval [t, t + horizon)."""
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon!r}")
    return history.count_in(t, t + horizon)


def build_training_set(
    histories: Mapping[int, EditorHistory],
    split: TimeSplit,
    periods: PeriodSeries,
    threads: int = 1,
) -> list[LabeledExample]:
    """One labeled example per editor active at t_train, ordered by user_id.

    Editors whose future window is empty are kept with y = 0; training on
    the stay-vs-leave boundary needs them.
    """
    active = active_editors(histories, split.t_train, split.activity_lookback)
    if not active:
        raise DataError(f"no active editors at t_train={split.t_train}")

    def one(uid: int) -> LabeledExample:
        history = histories[uid]
        x = featurize(history, split.t_train, periods)
        a = count_future_edits(history, split.t_train, split.horizon)
        return LabeledExample(uid, x, math.log1p(a), a)

    return _map_ordered(one, sorted(active), threads)


def build_prediction_set(
    histories: Mapping[int, EditorHistory],
    split: TimeSplit,
    periods: PeriodSeries,
    threads: int = 1,
) -> list[tuple[int, FeatureVector]]:
    """Unlabeled rows for every editor active at t_test, ordered by user_id."""
    active = active_editors(histories, split.t_test, split.activity_lookback)
    return _map_ordered(
        lambda uid: (uid, featurize(histories[uid], split.t_test, periods)),
        sorted(active),
        threads,
    )


def examples_to_arrays(
    examples: Iterable[LabeledExample],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(user_ids, X, y) arrays in the given example order."""
    examples = list(examples)
    user_ids = np.array([ex.user_id for ex in examples], dtype=np.int64)
    X = np.vstack([ex.x.as_array() for ex in examples])
    y = np.array([ex.y for ex in examples], dtype=np.float64)
    return user_ids, X, y


def write_training_csv(examples: Iterable[LabeledExample], dest: IO[str]) -> None:
    """Training-set export: `user_id, features..., y, a`."""
    examples = list(examples)
    if not examples:
        raise ValueError("no examples to write")
    k = len(examples[0].x.edits_per_window)
    dest.write(feature_header(k) + ",y,a\n")
    for ex in examples:
        counts = ",".join(
            str(c) for c in ex.x.edits_per_window + ex.x.articles_per_window
        )
        dest.write(f"{ex.user_id},{counts},{ex.x.log_tenure!r},{ex.y!r},{ex.a}\n")


def read_training_csv(source: IO[str]) -> list[LabeledExample]:
    """Inverse of write_training_csv; floats round-trip exactly."""
    header = source.readline().strip().split(",")
    if header[-2:] != ["y", "a"] or header[0] != "user_id":
        raise DataError(f"unexpected training CSV header: {header!r}")
    k = (len(header) - 4) // 2
    examples = []
    for line in source:
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        uid = int(parts[0])
        edits = tuple(int(v) for v in parts[1 : 1 + k])
        articles = tuple(int(v) for v in parts[1 + k : 1 + 2 * k])
        log_tenure = float(parts[1 + 2 * k])
        y = float(parts[2 + 2 * k])
        a = int(parts[3 + 2 * k])
        examples.append(LabeledExample(uid, FeatureVector(edits, articles, log_tenure), y, a))
    return examples
