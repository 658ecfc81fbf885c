from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupevo.errors import InputError
from groupevo.tsn import DAY, Interaction, LogFormat, parse_interactions, parse_timestamp, read_frames, window, write_frames


def test_parse_two_rows_unit_weights():
    log = parse_interactions("a,b,100\nb,a,200")
    assert [(i.source, i.target, i.timestamp, i.weight) for i in log.interactions] == [
        ("a", "b", 100, 1.0),
        ("b", "a", 200, 1.0),
    ]


def test_self_loop_dropped_and_counted():
    log = parse_interactions("a,a,100")
    assert log.interactions == []
    assert log.self_loops == 1


def test_missing_weight_column_defaults_to_one():
    log = parse_interactions("source,target,timestamp\nx,y,5\ny,z,6\n")
    assert [i.weight for i in log.interactions] == [1.0, 1.0]


def test_header_columns_in_any_order_and_tabs():
    log = parse_interactions("timestamp\tweight\ttarget\tsource\n7\t2.5\tb\ta\n")
    (it,) = log.interactions
    assert (it.source, it.target, it.timestamp, it.weight) == ("a", "b", 7, 2.5)


def test_iso_timestamps():
    assert parse_timestamp("1970-01-02T00:00:00Z") == DAY
    assert parse_timestamp("1970-01-02T00:00:00") == DAY
    assert parse_timestamp("86400") == DAY


def test_missing_required_column():
    with pytest.raises(InputError):
        parse_interactions("source,target,weight\na,b,1\n")


def test_malformed_rows_capped():
    text = "a,b,100\na,b,notatime\nc,d,300\n"
    with pytest.raises(InputError, match="line 2"):
        parse_interactions(text)
    log = parse_interactions(text, LogFormat(max_errors=1))
    assert len(log.interactions) == 2
    assert [n for n, _ in log.malformed] == [2]


def _days(*days):
    return [Interaction("a", "b", (d - 1) * DAY) for d in days]


def test_four_overlapping_frames_over_ten_days():
    tsn = window(_days(1, 10), 4 * DAY, 2 * DAY)
    assert len(tsn) == 4
    assert [(f.start / DAY + 1, f.end / DAY) for f in tsn] == [(1, 4), (3, 6), (5, 8), (7, 10)]


@pytest.mark.parametrize("span,expected", [(620, 13), (630, 14), (629, 13)])
def test_ninety_day_windows_with_half_overlap(span, expected):
    tsn = window(_days(1, span + 1), 90 * DAY, 45 * DAY)
    assert len(tsn) == expected
    assert 13 <= len(tsn) <= 14


def test_zero_overlap_tiles_without_sharing():
    its = [Interaction("a", "b", t) for t in range(0, 100, 7)]
    tsn = window(its, 10, 0)
    assert sum(f.edges[("a", "b")] for f in tsn if f.edges) == len(its)
    for f in tsn:
        assert f.end - f.start == 10


def test_boundary_timestamp_goes_to_later_frame_only():
    tsn = window([Interaction("a", "b", 0), Interaction("a", "b", 10)], 10, 0)
    assert tsn[0].edges == {("a", "b"): 1.0}
    assert tsn[1].edges == {("a", "b"): 1.0}


def test_window_errors():
    with pytest.raises(InputError):
        window(_days(1), DAY, DAY)
    with pytest.raises(InputError):
        window([], DAY)
    with pytest.raises(InputError):
        window(_days(1), 0)


interactions = st.lists(
    st.builds(
        Interaction,
        st.sampled_from("abcde"),
        st.sampled_from("vwxyz"),
        st.integers(0, 1000),
        st.floats(0, 10, allow_nan=False).map(lambda w: round(w, 3)),
    ),
    min_size=1,
    max_size=60,
)


@settings(max_examples=150, deadline=None)
@given(interactions, st.integers(1, 200), st.data())
def test_frame_weight_sum_matches_interval(its, length, data):
    overlap = data.draw(st.integers(0, length - 1))
    tsn = window(its, length, overlap)
    step = length - overlap
    assert all(b.start - a.start == step for a, b in zip(tsn.frames, tsn.frames[1:]))
    assert tsn[-1].start <= max(i.timestamp for i in its) < tsn[-1].end
    for f in tsn:
        inside = [i.weight for i in its if f.start <= i.timestamp < f.end]
        assert math.isclose(f.total_weight(), math.fsum(inside), abs_tol=1e-9)
        for (s, t) in f.edges:
            assert s in f.nodes and t in f.nodes


@settings(max_examples=40, deadline=None)
@given(interactions)
def test_frame_files_round_trip(tmp_path_factory, its):
    tsn = window([Interaction(i.source, i.target, i.timestamp, i.weight / 3) for i in its], 100, 30)
    out = tmp_path_factory.mktemp("frames")
    write_frames(tsn, out)
    assert read_frames(out) == tsn
