import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrfs.errors import MalformedInputError, NotLabeledError
from lrfs.state_model import (
    Label,
    LabeledSet,
    LabeledState,
    LTrajectory,
    TrackSegment,
    dumps_records,
    from_record,
    is_labeled,
    kinematic_state,
    labels_of,
    loads_records,
    segment_from_states,
    segment_to_states,
    segments_of,
    to_record,
)

from conftest import labels

L1, L2 = Label(0, 1), Label(0, 2)
X, Y = (1.0, 2.0), (3.0, -1.0)


def test_label_basics():
    assert Label(2, 3) == Label(2, 3)
    assert str(Label(2, 3)) == "2:3"
    assert Label.parse("2:3") == Label(2, 3)
    with pytest.raises(MalformedInputError):
        Label(0, 0)
    with pytest.raises(MalformedInputError):
        Label(-1, 1)


def test_labels_carry_no_order():
    with pytest.raises(TypeError):
        Label(0, 1) < Label(0, 2)


def test_kinematic_state():
    assert kinematic_state(3) == 3
    assert kinematic_state([1, 2]) == (1.0, 2.0)
    with pytest.raises(MalformedInputError):
        kinematic_state((float("nan"),))
    with pytest.raises(MalformedInputError):
        kinematic_state(-1)


class TestIsLabeled:
    def test_empty(self):
        assert is_labeled([])

    def test_shared_state_distinct_labels(self):
        assert is_labeled([(X, L1, 0), (X, L2, 0)])

    def test_repeated_label(self):
        assert not is_labeled([(X, L1, 0), (Y, L1, 0)])

    def test_mixed_times(self):
        with pytest.raises(MalformedInputError):
            is_labeled([(X, L1, 0), (Y, L2, 1)])

    def test_duplicates_collapse(self):
        assert is_labeled([(X, L1, 0), (X, L1, 0)])


class TestLabelsOf:
    def test_empty(self):
        assert labels_of([]) == frozenset()

    def test_projection(self):
        assert labels_of([(X, L1), (Y, L2)]) == {L1, L2}

    def test_repeated_label_projection(self):
        assert labels_of([(X, L1), (Y, L1)]) == {L1}


def test_labeled_set_rejects_repeated_label():
    with pytest.raises(NotLabeledError):
        LabeledSet([(X, L1, 0), (Y, L1, 0)])
    S = LabeledSet([(X, L1, 0), (X, L2, 0)])
    assert len(S) == 2 and S.labels == {L1, L2}
    assert S.state_of(L1) == X and S.state_of(Label(5, 5)) is None


def test_labeled_set_iteration_is_canonical():
    S = LabeledSet([(Y, Label(1, 1), 0), (X, Label(0, 2), 0), (X, Label(0, 1), 0)])
    assert [s.label for s in S] == [Label(0, 1), Label(0, 2), Label(1, 1)]


@given(st.lists(st.tuples(st.integers(0, 5), labels), max_size=6), st.lists(st.tuples(st.integers(0, 5), labels), max_size=6))
def test_labels_of_union(a, b):
    a = {lab: c for c, lab in a}
    b = {lab: c for c, lab in b}
    b = {lab: c for lab, c in b.items() if lab not in a or a[lab] == c}
    A = LabeledSet.from_pairs([(c, lab) for lab, c in a.items()], 0)
    B = LabeledSet.from_pairs([(c, lab) for lab, c in b.items()], 0)
    U = A.union(B)
    assert is_labeled(U)
    assert labels_of(U) == labels_of(A) | labels_of(B)


class TestSegments:
    def test_from_states(self):
        seg = segment_from_states([LabeledState(X, L1, 5), LabeledState(Y, L1, 6)])
        assert seg == TrackSegment(L1, 5, (X, Y))

    def test_single(self):
        seg = segment_from_states([LabeledState(X, L1, 5)])
        assert seg.length == 1 and seg.start_time == 5

    def test_gap(self):
        with pytest.raises(MalformedInputError):
            segment_from_states([LabeledState(X, L1, 5), LabeledState(Y, L1, 7)])

    def test_label_mismatch_and_empty(self):
        with pytest.raises(MalformedInputError):
            segment_from_states([LabeledState(X, L1, 5), LabeledState(Y, L2, 6)])
        with pytest.raises(MalformedInputError):
            segment_from_states([])

    def test_horizon(self):
        seg = TrackSegment(L1, 3, (X, Y))
        seg.check_horizon(4)
        with pytest.raises(MalformedInputError):
            seg.check_horizon(3)

    @given(st.integers(0, 20), st.lists(st.integers(0, 9), min_size=1, max_size=8), labels)
    def test_round_trip(self, start, cells, lab):
        states = tuple(LabeledState(c, lab, start + j) for j, c in enumerate(cells))
        assert segment_to_states(segment_from_states(states)) == states


class TestSegmentsOf:
    def test_all_empty(self):
        assert segments_of(LTrajectory(L1, (None, None, None))) == []

    def test_dropout(self):
        segs = segments_of(LTrajectory(L1, (1, 2, None, 3)))
        assert segs == [TrackSegment(L1, 1, (1, 2)), TrackSegment(L1, 4, (3,))]

    def test_single_entry(self):
        assert segments_of(LTrajectory(L1, (None, None, 7))) == [TrackSegment(L1, 3, (7,))]

    @given(st.lists(st.one_of(st.none(), st.integers(0, 5)), max_size=15))
    def test_partition_of_nonempty_entries(self, entries):
        traj = LTrajectory(L1, tuple(entries))
        segs = segments_of(traj)
        covered = [(t, x) for s in segs for t, x in zip(s.times(), s.states)]
        expected = [(j + 1, x) for j, x in enumerate(entries) if x is not None]
        assert covered == expected
        for a, b in zip(segs, segs[1:]):
            assert b.start_time >= a.end_time + 2


def test_records_round_trip():
    S = LabeledSet([((0.1, 2.5), L1, 4), ((0.1, 2.5), L2, 4)])
    seg = TrackSegment(Label(3, 1), 3, ((1.0,), (2.0,)))
    text = dumps_records([S, seg])
    for line in text.splitlines():
        json.loads(line)
    assert loads_records(text) == [S, seg]
    rec = to_record(S)
    assert rec["elements"][0]["label"] == "0:1"
    assert from_record(rec) == S


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=3), labels)
def test_record_decimal_round_trip(coords, lab):
    S = LabeledSet([(tuple(coords), lab, 0)])
    back = loads_records(dumps_records([S]))[0]
    for a, b in zip(back.state_of(lab), coords):
        assert abs(a - b) <= 1e-12 * max(1.0, abs(b))
