"""Seeded synthetic edit logs for desk-scale experiments.

Editors are independent counting processes with piecewise-constant,
exponentially decaying rates, so long activity windows carry signal that
the short ones miss.  A regime-shift option rescales every rate from a
given time onward, which makes the drift correction measurably useful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eventlog import DEFAULT_EPOCH, EditEvent, MonthPoint, snap_to_second


@dataclass(frozen=True)
class EditorProfile:
    """Sampled behaviour of one synthetic editor."""

    base_rate: float  # edits per month at the editor's start
    decay: float  # per-month multiplicative rate factor, in (0, 1]
    start: MonthPoint
    stop: MonthPoint
    article_pool: int

    def __post_init__(self):
        if not (self.base_rate > 0 and math.isfinite(self.base_rate)):
            raise ValueError(f"base_rate must be positive and finite: {self.base_rate!r}")
        if not 0 < self.decay <= 1:
            raise ValueError(f"decay must be in (0, 1]: {self.decay!r}")
        if not self.start < self.stop:
            raise ValueError(f"start must precede stop: {self.start!r} >= {self.stop!r}")
        if self.article_pool < 1:
            raise ValueError(f"article_pool must be >= 1: {self.article_pool}")


@dataclass(frozen=True)
class SimulationParams:
    """Ranges the per-editor profile sampler draws from."""

    rate_low: float = 0.5
    rate_high: float = 6.0
    decay_low: float = 0.85
    decay_high: float = 1.0
    start_spread: float = 0.0  # editor start times uniform in [0, start_spread]
    article_pool: int = 50
    regime_shift_at: float | None = None
    regime_shift_factor: float = 1.0

    def __post_init__(self):
        if not 0 < self.rate_low <= self.rate_high:
            raise ValueError(
                f"need 0 < rate_low <= rate_high, got {self.rate_low}, {self.rate_high}"
            )
        if not 0 < self.decay_low <= self.decay_high <= 1:
            raise ValueError(
                f"need 0 < decay_low <= decay_high <= 1, got "
                f"{self.decay_low}, {self.decay_high}"
            )
        if self.start_spread < 0:
            raise ValueError(f"start_spread must be >= 0: {self.start_spread}")
        if self.article_pool < 1:
            raise ValueError(f"article_pool must be >= 1: {self.article_pool}")
        if self.regime_shift_at is not None and self.regime_shift_factor <= 0:
            raise ValueError(
                f"regime_shift_factor must be positive: {self.regime_shift_factor}"
            )


def _draw_profile(
    rng: np.random.Generator, horizon: float, params: SimulationParams
) -> EditorProfile:
    base_rate = math.exp(
        rng.uniform(math.log(params.rate_low), math.log(params.rate_high))
    )
    decay = rng.uniform(params.decay_low, params.decay_high)
    start = rng.uniform(0.0, min(params.start_spread, horizon * 0.9))
    return EditorProfile(base_rate, decay, start, horizon, params.article_pool)


def _editor_events(
    rng: np.random.Generator, profile: EditorProfile, params: SimulationParams
) -> tuple[list[float], list[int]]:
    """Event times and article ids for one editor, unsorted within segments."""
    times: list[float] = []
    articles: list[int] = []
    shift_at = params.regime_shift_at
    month = 0
    lo = profile.start
    while lo < profile.stop:
        hi = min(profile.start + month + 1.0, profile.stop)
        rate = profile.base_rate * profile.decay**month
        # Split the segment at the regime shift so the factor applies cleanly.
        pieces = [(lo, hi)]
        if shift_at is not None and lo < shift_at < hi:
            pieces = [(lo, shift_at), (shift_at, hi)]
        for piece_lo, piece_hi in pieces:
            piece_rate = rate
            if shift_at is not None and piece_lo >= shift_at:
                piece_rate *= params.regime_shift_factor
            count = int(rng.poisson(piece_rate * (piece_hi - piece_lo)))
            if count:
                times.extend(piece_lo + rng.random(count) * (piece_hi - piece_lo))
                articles.extend(rng.integers(0, profile.article_pool, size=count))
        month += 1
        lo = profile.start + month
    return times, articles


def simulate(
    population: int,
    horizon: float,
    params: SimulationParams = SimulationParams(),
    seed: int = 0,
    epoch=DEFAULT_EPOCH,
) -> list[EditEvent]:
    """Generate a synthetic event log on [0, horizon) months.

    Fully deterministic per seed: every editor gets an independent spawned
    generator, so the result does not depend on evaluation order.  Event
    times are quantized to the timestamp grid, so writing the log to CSV
    and ingesting it back reproduces the events exactly.
    """
    if population < 1:
        raise ValueError(f"population must be >= 1, got {population}")
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon!r}")
    seeds = np.random.SeedSequence(seed).spawn(population)
    rows: list[tuple[float, int, int]] = []  # (time, user_id, article_id)
    for editor_index in range(population):
        rng = np.random.default_rng(seeds[editor_index])
        profile = _draw_profile(rng, horizon, params)
        times, articles = _editor_events(rng, profile, params)
        user_id = editor_index + 1
        for t, article in zip(times, articles):
            snapped = snap_to_second(t, epoch)
            if 0.0 <= snapped < horizon:
                rows.append((snapped, user_id, int(article)))
    rows.sort()
    return [
        EditEvent(user_id, article, revision_id, 0, t)
        for revision_id, (t, user_id, article) in enumerate(rows)
    ]


def simulate_doubling(
    population: int,
    n_periods: int,
    *,
    period_length: float = 5.0,
    initial_count: int = 1,
    article_pool: int = 20,
    epoch=DEFAULT_EPOCH,
) -> list[EditEvent]:
    """Regime-shift log with all-equal counts: every period, c -> 2c + 1.

    Each editor makes exactly c_k edits in period k, evenly spaced, where
    c_0 = initial_count and c_{k+1} = 2 * c_k + 1.  Because log(1 + c_{k+1})
    = log(1 + c_k) + log 2, the population drift over any period boundary
    is exactly log 2.
    """
    if population < 1:
        raise ValueError(f"population must be >= 1, got {population}")
    if n_periods < 1:
        raise ValueError(f"n_periods must be >= 1, got {n_periods}")
    if initial_count < 1:
        raise ValueError(f"initial_count must be >= 1, got {initial_count}")
    counts = [initial_count]
    for _ in range(n_periods - 1):
        counts.append(2 * counts[-1] + 1)
    rows: list[tuple[float, int, int]] = []
    for editor_index in range(population):
        user_id = editor_index + 1
        for k, c in enumerate(counts):
            period_start = k * period_length
            for j in range(c):
                t = snap_to_second(period_start + (j + 0.5) / c * period_length, epoch)
                rows.append((t, user_id, j % article_pool))
    rows.sort()
    return [
        EditEvent(user_id, article, revision_id, 0, t)
        for revision_id, (t, user_id, article) in enumerate(rows)
    ]
