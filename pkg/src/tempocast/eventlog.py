"""Event-log ingestion and the fractional-month time axis.

Every time-point in this package is a real number of months since a
dataset epoch (default 2001-01-01).  Whole months count calendar months;
the fraction inside a month is elapsed seconds over that month's total
seconds, so "2001-06-16 00:00:00" sits at exactly 5.5 and leap years need
no special casing.
"""

from __future__ import annotations

import calendar
import csv
import io
import re
from dataclasses import dataclass
from datetime import date
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import CsvError, TimestampError

DEFAULT_EPOCH = date(2001, 1, 1)

CSV_HEADER = "user_id,article_id,revision_id,namespace,timestamp"

_TS_RE = re.compile(
    r"^(?P<year>\d{4})-(?P<month>\d{2})-(?P<day>\d{2})"
    r" (?P<hour>\d{2}):(?P<minute>\d{2}):(?P<second>\d{2})$"
)

# A MonthPoint is a plain non-negative float, in months since the epoch.
MonthPoint = float


def _month_seconds(year: int, month: int) -> int:
    return calendar.monthrange(year, month)[1] * 86400


def _epoch_fraction(epoch: date) -> float:
    """Position of the epoch inside its own calendar month, in [0, 1)."""
    return ((epoch.day - 1) * 86400) / _month_seconds(epoch.year, epoch.month)


def parse_timestamp(ts: str, epoch: date = DEFAULT_EPOCH) -> MonthPoint:
    """Convert a "YYYY-MM-DD HH:MM:SS" string to months since the epoch.

    Raises TimestampError naming the offending field for malformed input,
    or when the timestamp precedes the epoch.
    """
    m = _TS_RE.match(ts)
    if m is None:
        raise TimestampError(f"not of the form 'YYYY-MM-DD HH:MM:SS': {ts!r}")
    year = int(m["year"])
    month = int(m["month"])
    day = int(m["day"])
    hour = int(m["hour"])
    minute = int(m["minute"])
    second = int(m["second"])
    if not 1 <= month <= 12:
        raise TimestampError(f"month out of range in {ts!r}: {month}")
    days_in_month = calendar.monthrange(year, month)[1]
    if not 1 <= day <= days_in_month:
        raise TimestampError(f"day out of range in {ts!r}: {day}")
    if hour > 23:
        raise TimestampError(f"hour out of range in {ts!r}: {hour}")
    if minute > 59:
        raise TimestampError(f"minute out of range in {ts!r}: {minute}")
    if second > 59:
        raise TimestampError(f"second out of range in {ts!r}: {second}")

    second_of_month = ((day - 1) * 86400) + hour * 3600 + minute * 60 + second
    whole = 12 * (year - epoch.year) + (month - epoch.month)
    fraction = second_of_month / _month_seconds(year, month)
    value = whole + (fraction - _epoch_fraction(epoch))
    if value < 0:
        raise TimestampError(f"timestamp {ts!r} precedes epoch {epoch.isoformat()}")
    return value


def format_timestamp(month: MonthPoint, epoch: date = DEFAULT_EPOCH) -> str:
    """Inverse of parse_timestamp, rounded to the nearest whole second."""
    if not month >= 0 or not np.isfinite(month):
        raise ValueError(f"month-point must be finite and >= 0, got {month!r}")
    target = month + _epoch_fraction(epoch)
    k = int(target)
    year, month_idx = divmod(12 * epoch.year + (epoch.month - 1) + k, 12)
    cal_month = month_idx + 1
    total = _month_seconds(year, cal_month)
    seconds = round((target - k) * total)
    if seconds >= total:  # fraction rounded up across a month boundary
        cal_month += 1
        if cal_month == 13:
            year += 1
            cal_month = 1
        seconds -= total
    day, rem = divmod(seconds, 86400)
    hour, rem = divmod(rem, 3600)
    minute, second = divmod(rem, 60)
    return (
        f"{year:04d}-{cal_month:02d}-{day + 1:02d}"
        f" {hour:02d}:{minute:02d}:{second:02d}"
    )


def snap_to_second(month: MonthPoint, epoch: date = DEFAULT_EPOCH) -> MonthPoint:
    """Quantize a month-point to the nearest representable CSV timestamp."""
    return parse_timestamp(format_timestamp(month, epoch), epoch)


@dataclass(frozen=True)
class EditEvent:
    """One timestamped edit, already placed on the month axis."""

    user_id: int
    article_id: int
    revision_id: int
    namespace: int
    time: MonthPoint


@dataclass(frozen=True)
class EditorHistory:
    """All events of a single editor, ascending by time.

    `times` and `article_ids` are cached array views used by the feature
    and dataset modules for interval queries; treat instances as immutable.
    """

    user_id: int
    events: tuple[EditEvent, ...]

    @cached_property
    def times(self) -> np.ndarray:
        return np.array([e.time for e in self.events], dtype=np.float64)

    @cached_property
    def article_ids(self) -> np.ndarray:
        return np.array([e.article_id for e in self.events], dtype=np.int64)

    def count_in(self, start: MonthPoint, end: MonthPoint) -> int:
        """Number of events with time in the half-open interval [start, end)."""
        lo, hi = np.searchsorted(self.times, [start, end], side="left")
        return int(hi - lo)


@dataclass(frozen=True)
class IngestReport:
    rows_total: int
    events_kept: int
    dropped_by_namespace: int


_COLUMNS = ("user_id", "article_id", "revision_id", "namespace", "timestamp")


def _parse_namespaces(spec: str) -> frozenset[int]:
    """Parse a namespace filter like "0-5" or "0,1,4" into a set of ints."""
    values: set[int] = set()
    for part in spec.split(","):
        part = part.strip()
        if "-" in part[1:]:  # allow a leading minus to fail int() below
            lo_s, hi_s = part.split("-", 1)
            lo, hi = int(lo_s), int(hi_s)
            if hi < lo:
                raise ValueError(f"empty namespace range {part!r}")
            values.update(range(lo, hi + 1))
        else:
            values.add(int(part))
    if not values:
        raise ValueError(f"no namespaces in filter {spec!r}")
    return frozenset(values)


def ingest(
    source: IO[str] | str,
    *,
    has_header: bool = True,
    namespace_filter: Iterable[int] | str | None = None,
    epoch: date = DEFAULT_EPOCH,
) -> tuple[list[EditEvent], IngestReport]:
    """Read edit events from CSV text (column order user_id,article_id,
    revision_id,namespace,timestamp).

    Rows whose namespace falls outside `namespace_filter` are dropped and
    counted in the report.  Malformed rows raise CsvError with the line
    number and column name.  Empty input yields an empty list.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    if namespace_filter is not None and isinstance(namespace_filter, str):
        namespace_filter = _parse_namespaces(namespace_filter)
    allowed = None if namespace_filter is None else frozenset(namespace_filter)

    reader = csv.reader(source)
    events: list[EditEvent] = []
    rows_total = 0
    dropped = 0
    for line_number, row in enumerate(reader, start=1):
        if line_number == 1 and has_header:
            continue
        if not row:
            continue
        rows_total += 1
        if len(row) != 5:
            raise CsvError(line_number, "row", f"expected 5 fields, got {len(row)}")
        ids: list[int] = []
        for column, text in zip(_COLUMNS[:4], row[:4]):
            try:
                value = int(text)
            except ValueError:
                raise CsvError(line_number, column, f"not an integer: {text!r}") from None
            if value < 0:
                raise CsvError(line_number, column, f"negative id: {value}")
            ids.append(value)
        try:
            time = parse_timestamp(row[4], epoch)
        except TimestampError as exc:
            raise CsvError(line_number, "timestamp", str(exc)) from None
        namespace = ids[3]
        if allowed is not None and namespace not in allowed:
            dropped += 1
            continue
        events.append(EditEvent(ids[0], ids[1], ids[2], namespace, time))
    return events, IngestReport(rows_total, len(events), dropped)


def write_events_csv(
    events: Sequence[EditEvent],
    dest: IO[str],
    *,
    epoch: date = DEFAULT_EPOCH,
    header: bool = True,
) -> None:
    """Write events in the exact CSV format `ingest` reads ("\\n" line ends)."""
    if header:
        dest.write(CSV_HEADER + "\n")
    for e in events:
        ts = format_timestamp(e.time, epoch)
        dest.write(f"{e.user_id},{e.article_id},{e.revision_id},{e.namespace},{ts}\n")


def build_histories(events: Iterable[EditEvent]) -> dict[int, EditorHistory]:
    """Group events per editor, sorted by time (stable for equal times).

    The result is keyed and ordered by ascending user_id; the union of all
    histories equals the input.
    """
    by_user: dict[int, list[EditEvent]] = {}
    for event in events:
        by_user.setdefault(event.user_id, []).append(event)
    histories: dict[int, EditorHistory] = {}
    for user_id in sorted(by_user):
        ordered = sorted(by_user[user_id], key=lambda e: e.time)
        histories[user_id] = EditorHistory(user_id, tuple(ordered))
    return histories
