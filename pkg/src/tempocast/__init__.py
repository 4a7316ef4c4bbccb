"""tempocast: forecast per-user activity counts from event timing alone.

The library turns a raw edit log into per-editor histories on a
fractional-month time axis, describes each active editor by activity
counts over exponentially spaced windows, trains gradient boosted
regression trees on log-transformed future counts obtained by shifting
the clock back one horizon, applies a global drift correction, and
scores predictions with the root mean squared logarithmic error.
"""

__version__ = "0.1.0"

from .dataset import (
    DEFAULT_HORIZON,
    DEFAULT_LOOKBACK,
    LabeledExample,
    TimeSplit,
    active_editors,
    build_prediction_set,
    build_training_set,
    count_future_edits,
    examples_to_arrays,
    read_training_csv,
    write_training_csv,
)
from .errors import ConfigError, CsvError, DataError, TimestampError
from .eventlog import (
    CSV_HEADER,
    DEFAULT_EPOCH,
    EditEvent,
    EditorHistory,
    IngestReport,
    MonthPoint,
    build_histories,
    format_timestamp,
    ingest,
    parse_timestamp,
    snap_to_second,
    write_events_csv,
)
from .features import (
    DEFAULT_WINDOWS,
    FeatureVector,
    PeriodSeries,
    default_periods,
    featurize,
    window_counts,
    write_feature_matrix,
)
from .forecast import (
    Drift,
    EvalReport,
    baseline_constant,
    baseline_recent5,
    estimate_drift,
    predict_counts,
    rmsle,
)
from .gbt import GbtModel, GbtParams, Leaf, SplitNode, best_split, fit, load_model, save_model
from .pipeline import (
    PipelineResult,
    RunConfig,
    SweepRow,
    actual_counts,
    config_from_dict,
    evaluate_against_log,
    read_predictions_csv,
    run_pipeline,
    run_sweep,
    write_predictions_csv,
)
from .synthgen import EditorProfile, SimulationParams, simulate, simulate_doubling

__all__ = [
    "__version__",
    "CSV_HEADER",
    "DEFAULT_EPOCH",
    "DEFAULT_HORIZON",
    "DEFAULT_LOOKBACK",
    "DEFAULT_WINDOWS",
    "ConfigError",
    "CsvError",
    "DataError",
    "Drift",
    "EditEvent",
    "EditorHistory",
    "EditorProfile",
    "EvalReport",
    "FeatureVector",
    "GbtModel",
    "GbtParams",
    "IngestReport",
    "LabeledExample",
    "Leaf",
    "MonthPoint",
    "PeriodSeries",
    "PipelineResult",
    "RunConfig",
    "SimulationParams",
    "SplitNode",
    "SweepRow",
    "TimeSplit",
    "TimestampError",
    "active_editors",
    "actual_counts",
    "baseline_constant",
    "baseline_recent5",
    "best_split",
    "build_histories",
    "build_prediction_set",
    "build_training_set",
    "config_from_dict",
    "count_future_edits",
    "default_periods",
    "estimate_drift",
    "evaluate_against_log",
    "examples_to_arrays",
    "featurize",
    "fit",
    "format_timestamp",
    "ingest",
    "load_model",
    "parse_timestamp",
    "predict_counts",
    "read_predictions_csv",
    "read_training_csv",
    "rmsle",
    "run_pipeline",
    "run_sweep",
    "save_model",
    "simulate",
    "simulate_doubling",
    "snap_to_second",
    "window_counts",
    "write_events_csv",
    "write_feature_matrix",
    "write_predictions_csv",
    "write_training_csv",
]
