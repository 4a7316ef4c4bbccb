import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from tempocast import EditEvent, EditorHistory


def make_history(user_id, times, articles=None):
    """Build an EditorHistory from raw month-points (articles default 0,1,2...)."""
    times = sorted(times)
    if articles is None:
        articles = range(len(times))
    events = tuple(
        EditEvent(user_id, int(a), i, 0, float(t))
        for i, (t, a) in enumerate(zip(times, articles))
    )
    return EditorHistory(user_id, events)
