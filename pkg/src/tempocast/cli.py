"""Command-line interface.

Subcommands: simulate, ingest-check, featurize, train, predict, evaluate,
run (full pipeline), sweep.  Exit codes: 0 success, 2 configuration error,
3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from datetime import date
from pathlib import Path

from . import __version__
from .dataset import (
    active_editors,
    build_prediction_set,
    build_training_set,
    examples_to_arrays,
    write_training_csv,
)
from .errors import ConfigError, DataError
from .eventlog import DEFAULT_EPOCH, build_histories, ingest, write_events_csv
from .features import DEFAULT_WINDOWS, PeriodSeries, featurize, write_feature_matrix
from .forecast import Drift, estimate_drift, predict_counts, rmsle
from .gbt import fit, load_model, save_model
from .pipeline import (
    RunConfig,
    _load_histories,
    actual_counts,
    config_from_dict,
    read_predictions_csv,
    run_pipeline,
    run_sweep,
    write_predictions_csv,
)
from .synthgen import SimulationParams, simulate


def _parse_epoch(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError as exc:
        raise ConfigError(f"bad --epoch value {text!r}: {exc}") from None


def _parse_windows(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --windows value {text!r}: {exc}") from None


def _add_ingest_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="event-log CSV path")
    p.add_argument("--epoch", default=None, help="dataset epoch date, YYYY-MM-DD")
    p.add_argument("--no-header", action="store_true", help="input has no header row")
    p.add_argument("--namespaces", default=None, help="keep only these namespaces, e.g. 0-5")


def _add_time_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t-test", type=float, required=True, help="prediction time-point, months")
    p.add_argument("--horizon", type=float, default=None, help="months to forecast (default 5)")
    p.add_argument("--lookback", type=float, default=None, help="activity window, months (default 12)")
    p.add_argument("--cap", type=float, default=None, help="window cap, months (default: t_train)")
    p.add_argument("--windows", default=None, help="comma-separated window lengths")


def _add_gbt_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--weak-count", type=int, default=None, help="number of trees (default 1000)")
    p.add_argument("--shrinkage", type=float, default=None, help="learning rate (default 0.1)")
    p.add_argument("--subsample", type=float, default=None, help="row fraction per tree (default 0.8)")
    p.add_argument("--max-depth", type=int, default=None, help="tree depth limit (default 5)")
    p.add_argument("--min-leaf", type=int, default=None, help="min rows per leaf (default 10)")
    p.add_argument("--seed", type=int, default=None, help="run seed (default 0)")


def _add_drift_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--drift-space", choices=["log", "raw"], default=None,
                   help="estimate drift on mean log counts (default) or raw means")
    p.add_argument("--no-drift", action="store_true", help="skip the drift correction (d = 0)")


def _ingest_kwargs(args) -> dict:
    return {
        "has_header": not args.no_header,
        "namespace_filter": args.namespaces,
        "epoch": _parse_epoch(args.epoch) if args.epoch else DEFAULT_EPOCH,
    }


def _load_events(args):
    path = Path(args.input)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        return ingest(f, **_ingest_kwargs(args))


def _build_run_config(args, require_outputs: bool) -> RunConfig:
    """Layer defaults, then the optional JSON config file, then explicit flags."""
    config = RunConfig(input_path="", t_test=0.0)
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            raw = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        config = config_from_dict(raw, base=config)

    overrides = {}
    if args.input is not None:
        overrides["input_path"] = args.input
    if args.t_test is not None:
        overrides["t_test"] = args.t_test
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if args.lookback is not None:
        overrides["lookback"] = args.lookback
    if args.cap is not None:
        overrides["cap"] = args.cap
    if args.windows is not None:
        overrides["windows"] = _parse_windows(args.windows)
    if args.epoch is not None:
        overrides["epoch"] = _parse_epoch(args.epoch)
    if args.no_header:
        overrides["has_header"] = False
    if args.namespaces is not None:
        overrides["namespaces"] = args.namespaces
    if args.drift_space is not None:
        overrides["drift_space"] = args.drift_space
    if args.no_drift:
        overrides["use_drift"] = False
    if args.threads is not None:
        overrides["threads"] = args.threads

    gbt_overrides = {}
    if args.weak_count is not None:
        gbt_overrides["weak_count"] = args.weak_count
    if args.shrinkage is not None:
        gbt_overrides["shrinkage"] = args.shrinkage
    if args.subsample is not None:
        gbt_overrides["subsample_fraction"] = args.subsample
    if args.max_depth is not None:
        gbt_overrides["max_depth"] = args.max_depth
    if args.min_leaf is not None:
        gbt_overrides["min_samples_leaf"] = args.min_leaf
    if args.seed is not None:
        gbt_overrides["seed"] = args.seed

    out_dir = Path(getattr(args, "out_dir", None) or ".")
    if require_outputs:
        overrides["model_out"] = args.model_out or str(out_dir / "model.gbt")
        overrides["predictions_out"] = args.pred_out or str(out_dir / "predictions.csv")
        overrides["manifest_out"] = args.manifest_out or str(out_dir / "manifest.json")

    try:
        gbt = replace(config.gbt, **gbt_overrides) if gbt_overrides else config.gbt
        config = replace(config, gbt=gbt, **overrides)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not config.input_path:
        raise ConfigError("an input file is required (--input or config file)")
    if config.t_test <= 0:
        raise ConfigError(f"t_test must be positive, got {config.t_test}")
    config.validate()
    return config


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    try:
        params = SimulationParams(
            rate_low=args.rate_low,
            rate_high=args.rate_high,
            decay_low=args.decay_low,
            decay_high=args.decay_high,
            start_spread=args.start_spread,
            article_pool=args.article_pool,
            regime_shift_at=args.regime_shift_at,
            regime_shift_factor=args.regime_shift_factor,
        )
        if args.population < 1 or args.horizon <= 0:
            raise ValueError("population must be >= 1 and horizon positive")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    epoch = _parse_epoch(args.epoch) if args.epoch else DEFAULT_EPOCH
    events = simulate(args.population, args.horizon, params, seed=args.seed, epoch=epoch)
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        write_events_csv(events, f, epoch=epoch)
    print(f"wrote {len(events)} events for {args.population} editors to {args.out}")
    return 0


def _cmd_ingest_check(args) -> int:
    events, report = _load_events(args)
    histories = build_histories(events)
    print(f"rows read:            {report.rows_total}")
    print(f"events kept:          {report.events_kept}")
    print(f"dropped by namespace: {report.dropped_by_namespace}")
    print(f"editors:              {len(histories)}")
    if events:
        times = [e.time for e in events]
        print(f"time span (months):   {min(times):.6f} .. {max(times):.6f}")
    return 0


def _cmd_featurize(args) -> int:
    lookback = args.lookback if args.lookback is not None else 12.0
    windows = _parse_windows(args.windows) if args.windows else DEFAULT_WINDOWS
    cap = args.cap if args.cap is not None else args.at
    if args.at < lookback:
        raise ConfigError(f"--at must be >= the {lookback}-month lookback, got {args.at}")
    try:
        periods = PeriodSeries(windows, cap)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    events, _ = _load_events(args)
    histories = build_histories(events)
    active = sorted(active_editors(histories, args.at, lookback))
    if not active:
        raise DataError(f"no active editors at t={args.at}")
    rows = [(uid, featurize(histories[uid], args.at, periods)) for uid in active]
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        write_feature_matrix(rows, f)
    print(f"wrote {len(rows)} feature rows to {args.out}")
    return 0


def _cmd_train(args) -> int:
    config = _build_run_config(args, require_outputs=False)
    split = config.split
    periods = config.periods(split.t_train)
    histories, _ = _load_histories(config)
    examples = build_training_set(histories, split, periods, threads=config.threads)
    if args.train_csv:
        with open(args.train_csv, "w", encoding="utf-8", newline="") as f:
            write_training_csv(examples, f)
    _uids, X, y = examples_to_arrays(examples)
    model = fit(X, y, config.gbt)
    with open(args.model_out, "w", encoding="utf-8", newline="") as f:
        save_model(model, f)
    print(f"trained on {len(examples)} editors; model written to {args.model_out}")
    return 0


def _cmd_predict(args) -> int:
    config = _build_run_config(args, require_outputs=False)
    model_path = Path(args.model)
    if not model_path.exists():
        raise DataError(f"model file not found: {model_path}")
    with open(model_path, "r", encoding="utf-8") as f:
        model = load_model(f)
    histories, _ = _load_histories(config)
    split = config.split
    periods = config.periods(split.t_train)
    if config.use_drift:
        drift = estimate_drift(
            histories,
            split.t_train,
            horizon=split.horizon,
            lookback=split.activity_lookback,
            space=config.drift_space,
        )
    else:
        drift = Drift(0.0)
    rows = build_prediction_set(histories, split, periods, threads=config.threads)
    predictions = predict_counts(model, drift, rows)
    with open(args.out, "w", encoding="utf-8", newline="") as f:
        write_predictions_csv(predictions, f)
    print(f"wrote {len(predictions)} predictions to {args.out} (drift d={drift.d:.6f})")
    return 0


def _cmd_evaluate(args) -> int:
    pred_path = Path(args.pred)
    if not pred_path.exists():
        raise DataError(f"predictions file not found: {pred_path}")
    with open(pred_path, "r", encoding="utf-8") as f:
        predictions = read_predictions_csv(f)
    if args.actual:
        actual: dict[int, float] = {}
        with open(args.actual, "r", encoding="utf-8") as f:
            header = f.readline().strip()
            if header.split(",")[:2] != ["user_id", "actual"]:
                raise DataError(f"unexpected actuals header: {header!r}")
            for line in f:
                line = line.strip()
                if line:
                    uid_s, value_s = line.split(",", 1)
                    actual[int(uid_s)] = float(value_s)
    else:
        if args.input is None or args.t_test is None:
            raise ConfigError("evaluate needs either --actual, or --input with --t-test")
        events, _ = _load_events(args)
        histories = build_histories(events)
        horizon = args.horizon if args.horizon is not None else 5.0
        actual = actual_counts(histories, sorted(predictions), args.t_test, horizon)
    try:
        report = rmsle(predictions, actual)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    print(str(report))
    return 0


def _cmd_run(args) -> int:
    config = _build_run_config(args, require_outputs=True)
    result = run_pipeline(config)
    print(
        f"trained on {result.n_train} editors, predicted {result.n_predict}"
        f" (drift d={result.drift.d:.6f})"
    )
    print(f"model:       {config.model_out}")
    print(f"predictions: {config.predictions_out}")
    print(f"manifest:    {config.manifest_out}")
    return 0


def _cmd_sweep(args) -> int:
    config = _build_run_config(args, require_outputs=False)
    values = None
    if args.values:
        try:
            values = [int(v) for v in args.values.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad --values: {exc}") from None
    rows = run_sweep(config, args.kind, values, table_out=args.table_out)
    label = "weak_count" if args.kind == "weak-count" else "periods"
    print(f"{label}\trmsle")
    for row in rows:
        print(f"{row.value}\t{row.epsilon:.6f}")
    if args.table_out:
        print(f"table written to {args.table_out}")
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tempocast",
        description="Forecast per-user activity counts from event-log timing.",
    )
    parser.add_argument("--version", action="version", version=f"tempocast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic event log")
    p.add_argument("--population", type=int, required=True)
    p.add_argument("--horizon", type=float, required=True, help="log length in months")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--rate-low", type=float, default=0.5)
    p.add_argument("--rate-high", type=float, default=6.0)
    p.add_argument("--decay-low", type=float, default=0.85)
    p.add_argument("--decay-high", type=float, default=1.0)
    p.add_argument("--start-spread", type=float, default=0.0)
    p.add_argument("--article-pool", type=int, default=50)
    p.add_argument("--regime-shift-at", type=float, default=None)
    p.add_argument("--regime-shift-factor", type=float, default=1.0)
    p.add_argument("--epoch", default=None)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("ingest-check", help="parse a log and report row counts")
    _add_ingest_flags(p)
    p.set_defaults(handler=_cmd_ingest_check)

    p = sub.add_parser("featurize", help="export the feature matrix at a time-point")
    _add_ingest_flags(p)
    p.add_argument("--at", type=float, required=True, help="evaluation time-point, months")
    p.add_argument("--cap", type=float, default=None, help="window cap (default: --at)")
    p.add_argument("--lookback", type=float, default=None)
    p.add_argument("--windows", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_featurize)

    p = sub.add_parser("train", help="build the training set and fit the model")
    _add_ingest_flags(p)
    _add_time_flags(p)
    _add_gbt_flags(p)
    _add_drift_flags(p)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON config file; flags win")
    p.add_argument("--model-out", required=True)
    p.add_argument("--train-csv", default=None, help="also export the training set CSV")
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("predict", help="apply a trained model at t_test")
    _add_ingest_flags(p)
    _add_time_flags(p)
    _add_gbt_flags(p)
    _add_drift_flags(p)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--model", required=True, help="model file from train/run")
    p.add_argument("--out", required=True, help="predictions CSV path")
    p.set_defaults(handler=_cmd_predict)

    p = sub.add_parser("evaluate", help="RMSLE of a predictions file")
    p.add_argument("--pred", required=True, help="predictions CSV")
    p.add_argument("--actual", default=None, help="actuals CSV (user_id,actual)")
    p.add_argument("--input", default=None, help="event log to derive actuals from")
    p.add_argument("--epoch", default=None)
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--namespaces", default=None)
    p.add_argument("--t-test", type=float, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("run", help="full pipeline: learn, predict, write artifacts")
    _add_ingest_flags(p)
    _add_time_flags(p)
    _add_gbt_flags(p)
    _add_drift_flags(p)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON config file; flags win")
    p.add_argument("--out-dir", default=None, help="directory for default output names")
    p.add_argument("--model-out", default=None)
    p.add_argument("--pred-out", default=None)
    p.add_argument("--manifest-out", default=None)
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("sweep", help="grid evaluation with held-out labels")
    _add_ingest_flags(p)
    _add_time_flags(p)
    _add_gbt_flags(p)
    _add_drift_flags(p)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--kind", choices=["weak-count", "periods"], required=True)
    p.add_argument("--values", default=None, help="comma-separated grid values")
    p.add_argument("--table-out", default=None, help="write the table to this path")
    p.set_defaults(handler=_cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"tempocast: config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"tempocast: data error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # internal error
        print(f"tempocast: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
