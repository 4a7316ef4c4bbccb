"""End-to-end orchestration: learn at t_train, predict at t_test.

Also home to the sweep harness, which shifts the whole exercise one more
horizon into the past so that held-out labels exist for every grid point.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field, fields, replace
from datetime import date
from pathlib import Path
from typing import IO, Mapping, Sequence

from . import __version__
from .dataset import (
    DEFAULT_HORIZON,
    DEFAULT_LOOKBACK,
    TimeSplit,
    build_prediction_set,
    build_training_set,
    examples_to_arrays,
)
from .errors import ConfigError, DataError
from .eventlog import DEFAULT_EPOCH, EditorHistory, build_histories, ingest
from .features import DEFAULT_WINDOWS, PeriodSeries
from .forecast import DRIFT_SPACES, Drift, EvalReport, estimate_drift, predict_counts, rmsle
from .gbt import GbtModel, GbtParams, fit, save_model

PERIOD_SWEEP_LENGTHS = tuple(range(1, len(DEFAULT_WINDOWS) + 1))


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs; validated before any work starts."""

    input_path: str
    t_test: float
    horizon: float = DEFAULT_HORIZON
    lookback: float = DEFAULT_LOOKBACK
    cap: float | None = None  # None: fixed to t_train of the run
    windows: tuple[float, ...] = DEFAULT_WINDOWS
    epoch: date = DEFAULT_EPOCH
    has_header: bool = True
    namespaces: str | None = None
    gbt: GbtParams = field(default_factory=GbtParams)
    drift_space: str = "log"
    use_drift: bool = True
    threads: int = 1
    model_out: str | None = None
    predictions_out: str | None = None
    manifest_out: str | None = None

    def validate(self) -> None:
        try:
            TimeSplit(self.t_test, self.horizon, self.lookback)
            PeriodSeries(tuple(self.windows), self.cap if self.cap is not None else 1.0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.drift_space not in DRIFT_SPACES:
            raise ConfigError(
                f"drift space must be one of {DRIFT_SPACES}, got {self.drift_space!r}"
            )
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")

    @property
    def split(self) -> TimeSplit:
        return TimeSplit(self.t_test, self.horizon, self.lookback)

    def periods(self, t_train: float) -> PeriodSeries:
        return PeriodSeries(tuple(self.windows), self.cap if self.cap is not None else t_train)

    def to_manifest_dict(self) -> dict:
        return {
            "input": str(self.input_path),
            "t_test": self.t_test,
            "horizon": self.horizon,
            "lookback": self.lookback,
            "cap": self.cap,
            "windows": list(self.windows),
            "epoch": self.epoch.isoformat(),
            "has_header": self.has_header,
            "namespaces": self.namespaces,
            "weak_count": self.gbt.weak_count,
            "shrinkage": self.gbt.shrinkage,
            "subsample_fraction": self.gbt.subsample_fraction,
            "max_depth": self.gbt.max_depth,
            "min_samples_leaf": self.gbt.min_samples_leaf,
            "seed": self.gbt.seed,
            "drift_space": self.drift_space,
            "use_drift": self.use_drift,
            "threads": self.threads,
            "model_out": self.model_out,
            "predictions_out": self.predictions_out,
            "manifest_out": self.manifest_out,
        }


def config_from_dict(raw: Mapping, base: RunConfig | None = None) -> RunConfig:
    """Build a RunConfig from a JSON-shaped mapping (a manifest also works:
    its "config" sub-object is used when present)."""
    if "config" in raw and isinstance(raw["config"], Mapping):
        raw = raw["config"]
    known = {f.name for f in fields(RunConfig)} | {
        "input",
        "weak_count",
        "shrinkage",
        "subsample_fraction",
        "max_depth",
        "min_samples_leaf",
        "seed",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    gbt_kwargs = {}
    for key, value in raw.items():
        if key == "input":
            kwargs["input_path"] = str(value)
        elif key == "gbt":
            raise ConfigError("specify GBT parameters as flat keys, not a 'gbt' object")
        elif key in ("weak_count", "max_depth", "min_samples_leaf", "seed"):
            gbt_kwargs[key] = int(value)
        elif key in ("shrinkage", "subsample_fraction"):
            gbt_kwargs[key] = float(value)
        elif key == "windows":
            kwargs["windows"] = tuple(float(w) for w in value)
        elif key == "epoch":
            kwargs["epoch"] = date.fromisoformat(value)
        else:
            kwargs[key] = value
    base_gbt = base.gbt if base is not None else GbtParams()
    try:
        gbt = replace(base_gbt, **gbt_kwargs) if gbt_kwargs else base_gbt
        if base is not None:
            return replace(base, gbt=gbt, **kwargs)
        return RunConfig(gbt=gbt, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


@dataclass(frozen=True)
class PipelineResult:
    model: GbtModel
    drift: Drift
    predictions: dict[int, float]
    n_events: int
    n_editors: int
    n_train: int
    n_predict: int
    timings: dict[str, float]


def _load_histories(config: RunConfig) -> tuple[dict[int, EditorHistory], int]:
    path = Path(config.input_path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        events, _report = ingest(
            f,
            has_header=config.has_header,
            namespace_filter=config.namespaces,
            epoch=config.epoch,
        )
    return build_histories(events), len(events)


def _learn_and_predict(
    histories: Mapping[int, EditorHistory],
    split: TimeSplit,
    periods: PeriodSeries,
    params: GbtParams,
    drift_space: str,
    use_drift: bool,
    threads: int,
    timings: dict[str, float] | None = None,
) -> tuple[GbtModel, Drift, dict[int, float], int, int]:
    clock = time.perf_counter
    t0 = clock()
    examples = build_training_set(histories, split, periods, threads=threads)
    _uids, X, y = examples_to_arrays(examples)
    t1 = clock()
    model = fit(X, y, params)
    t2 = clock()
    if use_drift:
        drift = estimate_drift(
            histories,
            split.t_train,
            horizon=split.horizon,
            lookback=split.activity_lookback,
            space=drift_space,
        )
    else:
        drift = Drift(0.0)
    rows = build_prediction_set(histories, split, periods, threads=threads)
    predictions = predict_counts(model, drift, rows)
    t3 = clock()
    if timings is not None:
        timings["featurize_train"] = t1 - t0
        timings["fit"] = t2 - t1
        timings["predict"] = t3 - t2
    return model, drift, predictions, len(examples), len(rows)


def write_predictions_csv(predictions: Mapping[int, float], dest: IO[str]) -> None:
    dest.write("user_id,prediction\n")
    for uid in sorted(predictions):
        dest.write(f"{uid},{predictions[uid]!r}\n")


def read_predictions_csv(source: IO[str]) -> dict[int, float]:
    header = source.readline().strip()
    if header != "user_id,prediction":
        raise DataError(f"unexpected predictions header: {header!r}")
    out: dict[int, float] = {}
    for line in source:
        line = line.strip()
        if not line:
            continue
        uid_s, value_s = line.split(",", 1)
        out[int(uid_s)] = float(value_s)
    return out


def _atomic_write(path: str, body_writer) -> None:
    """Write via a temp file and rename, so failures leave nothing partial."""
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as f:
            body_writer(f)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_pipeline(config: RunConfig) -> PipelineResult:
    """Execute learning then prediction and write the configured artifacts."""
    config.validate()
    timings: dict[str, float] = {}
    clock = time.perf_counter
    t0 = clock()
    histories, n_events = _load_histories(config)
    timings["ingest"] = clock() - t0

    split = config.split
    periods = config.periods(split.t_train)
    model, drift, predictions, n_train, n_predict = _learn_and_predict(
        histories,
        split,
        periods,
        config.gbt,
        config.drift_space,
        config.use_drift,
        config.threads,
        timings,
    )

    result = PipelineResult(
        model=model,
        drift=drift,
        predictions=predictions,
        n_events=n_events,
        n_editors=len(histories),
        n_train=n_train,
        n_predict=n_predict,
        timings=timings,
    )
    if config.model_out:
        _atomic_write(config.model_out, lambda f: save_model(model, f))
    if config.predictions_out:
        _atomic_write(config.predictions_out, lambda f: write_predictions_csv(predictions, f))
    if config.manifest_out:
        manifest = {
            "tool": "tempocast",
            "version": __version__,
            "config": config.to_manifest_dict(),
            "populations": {
                "events": n_events,
                "editors": len(histories),
                "train": n_train,
                "predict": n_predict,
            },
            "drift": drift.d,
            "base_score": model.base_score,
            "trees": len(model.trees),
            "timings_sec": {k: round(v, 6) for k, v in timings.items()},
        }
        _atomic_write(
            config.manifest_out,
            lambda f: f.write(json.dumps(manifest, indent=2) + "\n"),
        )
    return result


def actual_counts(
    histories: Mapping[int, EditorHistory],
    user_ids: Sequence[int],
    t: float,
    horizon: float = DEFAULT_HORIZON,
) -> dict[int, float]:
    """Observed counts in [t, t + horizon) for the given editors (0 if absent)."""
    out: dict[int, float] = {}
    for uid in user_ids:
        h = histories.get(uid)
        out[uid] = float(h.count_in(t, t + horizon)) if h is not None else 0.0
    return out


@dataclass(frozen=True)
class SweepRow:
    value: int
    epsilon: float


def run_sweep(
    config: RunConfig,
    kind: str,
    values: Sequence[int] | None = None,
    table_out: str | None = None,
) -> list[SweepRow]:
    """Grid evaluation with held-out labels via a second backward shift.

    Models are trained at t_test - 2*horizon and scored at t_test - horizon,
    where true counts are observable.  kind "weak-count" varies the ensemble
    size over `values`; kind "periods" varies how many of the configured
    windows are used, over prefix lengths 1..k (default all).
    """
    if kind not in ("weak-count", "periods"):
        raise ConfigError(f"sweep kind must be 'weak-count' or 'periods', got {kind!r}")
    if kind == "weak-count":
        if not values:
            raise ConfigError("a weak-count sweep needs --values")
        if any(v < 1 for v in values):
            raise ConfigError(f"weak_count values must be >= 1: {list(values)}")
    else:
        if values is None:
            values = [n for n in PERIOD_SWEEP_LENGTHS if n <= len(config.windows)]
        if any(not 1 <= v <= len(config.windows) for v in values):
            raise ConfigError(
                f"period prefix lengths must be in 1..{len(config.windows)}: {list(values)}"
            )
    config.validate()
    eval_t = config.t_test - config.horizon
    try:
        eval_split = TimeSplit(eval_t, config.horizon, config.lookback)
    except ValueError as exc:
        raise ConfigError(f"sweep needs room for a second backward shift: {exc}") from None

    histories, _ = _load_histories(config)
    cap = config.cap if config.cap is not None else eval_split.t_train
    rows: list[SweepRow] = []
    for value in values:
        if kind == "weak-count":
            params = replace(config.gbt, weak_count=int(value))
            periods = PeriodSeries(tuple(config.windows), cap)
        else:
            params = config.gbt
            periods = PeriodSeries(tuple(config.windows[: int(value)]), cap)
        _model, _drift, predictions, _n_train, _n_predict = _learn_and_predict(
            histories,
            eval_split,
            periods,
            params,
            config.drift_space,
            config.use_drift,
            config.threads,
        )
        actual = actual_counts(histories, sorted(predictions), eval_t, config.horizon)
        report = rmsle(predictions, actual)
        rows.append(SweepRow(int(value), report.epsilon))

    if table_out:
        label = "weak_count" if kind == "weak-count" else "periods"
        def _write(f):
            f.write(f"{label}\trmsle\n")
            for row in rows:
                f.write(f"{row.value}\t{row.epsilon:.6f}\n")
        _atomic_write(table_out, _write)
    return rows


def evaluate_against_log(
    predictions: Mapping[int, float],
    histories: Mapping[int, EditorHistory],
    t: float,
    horizon: float = DEFAULT_HORIZON,
) -> EvalReport:
    return rmsle(predictions, actual_counts(histories, sorted(predictions), t, horizon))
