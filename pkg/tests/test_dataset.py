import io
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempocast import (
    DataError,
    TimeSplit,
    active_editors,
    build_prediction_set,
    build_training_set,
    count_future_edits,
    default_periods,
    read_training_csv,
    write_training_csv,
)

from conftest import make_history
from oracles import interval_count_oracle


def random_population(rng, n_editors=60, span=40.0):
    histories = {}
    for uid in range(1, n_editors + 1):
        n = rng.randrange(1, 25)
        times = [rng.uniform(0, span) for _ in range(n)]
        histories[uid] = make_history(uid, times)
    return histories


# ---------------------------------------------------------------------------
# TimeSplit
# ---------------------------------------------------------------------------


def test_split_derives_train_time():
    split = TimeSplit(116.0)
    assert split.t_train == 111.0
    assert split.horizon == 5.0
    assert split.activity_lookback == 12.0


def test_split_rejects_train_time_inside_lookback():
    with pytest.raises(ValueError, match="lookback"):
        TimeSplit(16.9)
    TimeSplit(17.0)  # exactly at the boundary is fine


def test_split_custom_horizon_and_lookback():
    split = TimeSplit(20.0, horizon=3.0, activity_lookback=6.0)
    assert split.t_train == 17.0


# ---------------------------------------------------------------------------
# active_editors
# ---------------------------------------------------------------------------


def test_activity_boundaries_are_half_open():
    t = 30.0
    histories = {
        1: make_history(1, [t - 12.0]),  # exactly at t-12: inside
        2: make_history(2, [t]),  # exactly at t: outside
        3: make_history(3, [t - 12.0001]),  # just before the window
    }
    assert active_editors(histories, t) == {1}


def test_activity_requires_t_at_least_lookback():
    with pytest.raises(ValueError):
        active_editors({}, 11.9)


def test_activity_matches_brute_force_oracle():
    rng = random.Random(17)
    histories = random_population(rng)
    t = 35.0
    expected = {
        uid
        for uid, h in histories.items()
        if interval_count_oracle(h.events, t - 12.0, t) > 0
    }
    assert active_editors(histories, t) == expected


# ---------------------------------------------------------------------------
# count_future_edits
# ---------------------------------------------------------------------------


def test_future_count_empty():
    assert count_future_edits(make_history(1, [1.0]), 10.0) == 0


def test_future_count_half_open():
    t = 20.0
    history = make_history(1, [t, t + 4.999])
    assert count_future_edits(history, t) == 2
    assert count_future_edits(make_history(1, [t + 5.0]), t) == 0


# ---------------------------------------------------------------------------
# training / prediction sets
# ---------------------------------------------------------------------------


def test_training_keeps_zero_future_editors():
    split = TimeSplit(25.0)
    histories = {
        1: make_history(1, [15.0]),  # active at 20, silent afterwards
        2: make_history(2, [15.0, 21.0]),  # one future edit
    }
    examples = build_training_set(histories, split, default_periods(cap=20.0))
    by_uid = {ex.user_id: ex for ex in examples}
    assert by_uid[1].a == 0 and by_uid[1].y == 0.0
    assert by_uid[2].a == 1 and by_uid[2].y == math.log(2)


def test_training_count_equals_active_population():
    rng = random.Random(23)
    histories = random_population(rng, n_editors=200)
    split = TimeSplit(35.0)
    examples = build_training_set(histories, split, default_periods(cap=split.t_train))
    assert len(examples) == len(active_editors(histories, split.t_train))
    assert [ex.user_id for ex in examples] == sorted(ex.user_id for ex in examples)


def test_training_errors_on_empty_population():
    histories = {1: make_history(1, [0.5])}  # long gone by t_train
    with pytest.raises(DataError, match="no active editors"):
        build_training_set(histories, TimeSplit(30.0), default_periods(cap=25.0))


@given(st.integers(min_value=0, max_value=500))
@settings(max_examples=40, deadline=None)
def test_label_transform_inverts_exactly(a):
    y = math.log1p(a)
    assert abs(math.expm1(y) - a) < 1e-9 * (1 + a)
    assert (y == 0.0) == (a == 0)


def test_features_blind_to_future_events():
    split = TimeSplit(25.0)
    periods = default_periods(cap=split.t_train)
    past = [12.0, 15.5, 19.0]
    base = {1: make_history(1, past)}
    perturbed = {1: make_history(1, past + [20.0, 21.5, 24.0])}
    x0 = build_training_set(base, split, periods)[0].x
    x1 = build_training_set(perturbed, split, periods)[0].x
    assert x0 == x1


def test_prediction_set_uses_test_time_activity():
    split = TimeSplit(25.0)
    periods = default_periods(cap=split.t_train)
    histories = {
        1: make_history(1, [24.0]),  # active at t_test only
        2: make_history(2, [9.0]),  # inactive everywhere relevant
        3: make_history(3, [14.0, 18.0]),  # active at both times
    }
    rows = build_prediction_set(histories, split, periods)
    assert [uid for uid, _ in rows] == [1, 3]


def test_editor_silent_for_13_months_excluded():
    split = TimeSplit(25.0)
    histories = {1: make_history(1, [split.t_test - 13.0])}
    assert build_prediction_set(histories, split, default_periods(cap=20.0)) == []


def test_threaded_builds_match_sequential():
    rng = random.Random(31)
    histories = random_population(rng, n_editors=80)
    split = TimeSplit(35.0)
    periods = default_periods(cap=split.t_train)
    assert build_training_set(histories, split, periods) == build_training_set(
        histories, split, periods, threads=4
    )
    assert build_prediction_set(histories, split, periods) == build_prediction_set(
        histories, split, periods, threads=4
    )


def test_training_csv_round_trip():
    rng = random.Random(41)
    histories = random_population(rng, n_editors=30)
    split = TimeSplit(35.0)
    examples = build_training_set(histories, split, default_periods(cap=split.t_train))
    buf = io.StringIO()
    write_training_csv(examples, buf)
    buf.seek(0)
    assert read_training_csv(buf) == examples
