import io
import math
import random

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempocast import (
    DEFAULT_WINDOWS,
    PeriodSeries,
    default_periods,
    featurize,
    window_counts,
    write_feature_matrix,
)

from conftest import make_history
from oracles import featurize_oracle, window_counts_oracle


def random_history(rng, user_id=1, span=120.0, max_events=60):
    n = rng.randrange(1, max_events)
    times = [rng.uniform(0, span) for _ in range(n)]
    articles = [rng.randrange(12) for _ in range(n)]
    return make_history(user_id, times, articles)


# ---------------------------------------------------------------------------
# period series
# ---------------------------------------------------------------------------


def test_default_series_shape():
    periods = default_periods(cap=116)
    assert periods.windows == DEFAULT_WINDOWS
    assert len(periods) == 10
    assert periods.effective_windows == DEFAULT_WINDOWS  # cap beyond the longest


def test_cap_shortens_only_the_long_windows():
    periods = default_periods(cap=106)
    assert periods.windows[-1] == 108  # stored series untouched
    assert periods.effective_windows[-1] == 106
    assert periods.effective_windows[:-1] == DEFAULT_WINDOWS[:-1]


def test_tiny_cap_dominates_everything():
    periods = default_periods(cap=0.05)
    assert periods.effective_windows == (0.05,) * 10


@pytest.mark.parametrize("cap", [0, -1.0])
def test_nonpositive_cap_rejected(cap):
    with pytest.raises(ValueError):
        default_periods(cap)


def test_windows_must_ascend():
    with pytest.raises(ValueError):
        PeriodSeries((1.0, 1.0), cap=10)
    with pytest.raises(ValueError):
        PeriodSeries((2.0, 1.0), cap=10)
    with pytest.raises(ValueError):
        PeriodSeries((), cap=10)


# ---------------------------------------------------------------------------
# window_counts
# ---------------------------------------------------------------------------


def test_window_counts_on_known_history():
    history = make_history(1, [115.9, 115.5, 110.0, 50.0])
    assert window_counts(history, 116.0, 1 / 8)[0] == 1
    assert window_counts(history, 116.0, 12.0)[0] == 3
    assert window_counts(history, 116.0, 116.0)[0] == 4


def test_window_counts_empty_history():
    history = make_history(1, [])
    assert window_counts(history, 116.0, 12.0) == (0, 0)


def test_window_boundaries_are_half_open():
    history = make_history(1, [4.0, 8.0])
    # event exactly at t - w is inside, event exactly at t is outside
    assert window_counts(history, 8.0, 4.0) == (1, 1)
    assert window_counts(history, 4.0, 4.0) == (0, 0)


def test_window_counts_requires_positive_window():
    with pytest.raises(ValueError):
        window_counts(make_history(1, [1.0]), 5.0, 0.0)


def test_distinct_articles_counted_once():
    history = make_history(1, [9.1, 9.2, 9.3], articles=[5, 5, 6])
    assert window_counts(history, 10.0, 1.0) == (3, 2)


# ---------------------------------------------------------------------------
# featurize
# ---------------------------------------------------------------------------


def test_single_event_has_zero_tenure():
    history = make_history(1, [100.0])
    fv = featurize(history, 116.0, default_periods(cap=116))
    assert fv.log_tenure == 0.0
    # only windows reaching back at least 16 months see the event
    assert fv.edits_per_window == (0, 0, 0, 0, 0, 0, 0, 0, 1, 1)


def test_tenure_matches_high_precision_log():
    history = make_history(1, [50.0, 115.9])
    fv = featurize(history, 116.0, default_periods(cap=116))
    assert fv.log_tenure == math.log1p(115.9 - 50.0)
    with mpmath.workdps(40):
        exact = mpmath.log(mpmath.mpf(1) + (mpmath.mpf("115.9") - 50))
        assert abs(fv.log_tenure - float(exact)) < 1e-12


def test_featurize_ignores_events_at_or_after_t():
    periods = default_periods(cap=30)
    base = make_history(1, [10.0, 20.0])
    extended = make_history(1, [10.0, 20.0, 25.0, 30.0])
    assert featurize(base, 25.0, periods) == featurize(extended, 25.0, periods)


def test_featurize_requires_an_event_before_t():
    with pytest.raises(ValueError, match="no events before"):
        featurize(make_history(1, [10.0]), 5.0, default_periods(cap=10))


def test_vector_has_21_components():
    fv = featurize(make_history(1, [1.0, 2.0]), 116.0, default_periods(cap=116))
    assert fv.width == 21
    assert fv.as_array().shape == (21,)


def test_featurize_matches_brute_force_oracle():
    rng = random.Random(5)
    periods = default_periods(cap=111)
    for _ in range(500):
        history = random_history(rng)
        t = 116.0
        if not any(e.time < t for e in history.events):
            continue
        fv = featurize(history, t, periods)
        edits, articles, log_tenure = featurize_oracle(
            history.events, t, periods.windows, periods.cap
        )
        assert fv.edits_per_window == tuple(edits)
        assert fv.articles_per_window == tuple(articles)
        assert abs(fv.log_tenure - log_tenure) < 1e-12


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_nesting_and_count_invariants(data):
    times = data.draw(
        st.lists(st.floats(min_value=0, max_value=100, allow_nan=False), min_size=1, max_size=30)
    )
    articles = data.draw(
        st.lists(st.integers(min_value=0, max_value=8), min_size=len(times), max_size=len(times))
    )
    history = make_history(1, times, articles)
    fv = featurize(history, 101.0, default_periods(cap=101))
    e, a = fv.edits_per_window, fv.articles_per_window
    assert all(x <= y for x, y in zip(e, e[1:]))  # windows nest
    assert all(x <= y for x, y in zip(a, a[1:]))
    assert all(ai <= ei for ai, ei in zip(a, e))
    assert fv.log_tenure >= 0


def test_shift_invariance():
    rng = random.Random(9)
    times = [rng.uniform(0, 50) for _ in range(20)]
    articles = [rng.randrange(6) for _ in range(20)]
    periods = default_periods(cap=55)
    delta = 7.25
    before = featurize(make_history(1, times, articles), 55.0, periods)
    after = featurize(make_history(1, [t + delta for t in times], articles), 55.0 + delta, periods)
    assert before == after


def test_feature_matrix_export_format():
    history = make_history(4, [1.0, 2.0], articles=[3, 3])
    fv = featurize(history, 13.0, default_periods(cap=13))
    buf = io.StringIO()
    write_feature_matrix([(4, fv)], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("user_id,e_1,")
    assert lines[0].endswith(",a_10,log_tenure")
    assert len(lines) == 2
    assert lines[1].split(",")[0] == "4"
    assert float(lines[1].split(",")[-1]) == fv.log_tenure
