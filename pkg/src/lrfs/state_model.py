"""Labels, labeled states, labeled sets and track segments.

A kinematic state is either a tuple of finite floats or, for grid work, a
non-negative integer cell index.  Labels are ``(birth_time, index)`` pairs.
Labels deliberately do not implement ``<``; :attr:`Label.key` gives the
canonical lexicographic order used for serialization and deterministic
iteration only.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

from .errors import MalformedInputError, NotLabeledError

KinematicState = Union[int, tuple]

__all__ = [
    "KinematicState",
    "Label",
    "LabeledState",
    "LabeledSet",
    "TrackSegment",
    "LTrajectory",
    "kinematic_state",
    "state_key",
    "is_labeled",
    "labels_of",
    "segment_from_states",
    "segment_to_states",
    "segments_of",
    "to_record",
    "from_record",
    "dumps_records",
    "loads_records",
]


def kinematic_state(x) -> KinematicState:
    """Normalize ``x`` to a kinematic state.

    Integers are kept as grid cell indices; scalars and sequences become
    tuples of floats.
    """
    if isinstance(x, bool):
        raise MalformedInputError("a boolean is not a kinematic state")
    if isinstance(x, int) or (hasattr(x, "dtype") and getattr(x, "ndim", 1) == 0
                              and x.dtype.kind in "iu"):
        x = int(x)
        if x < 0:
            raise MalformedInputError(f"grid cell index must be >= 0, got {x}")
        return x
    if isinstance(x, float) or (hasattr(x, "ndim") and x.ndim == 0):
        coords = (float(x),)
    else:
        coords = tuple(float(v) for v in x)
    if not coords:
        raise MalformedInputError("kinematic state needs at least one coordinate")
    if not all(math.isfinite(v) for v in coords):
        raise MalformedInputError(f"non-finite coordinate in {coords}")
    return coords


def state_key(x: KinematicState) -> tuple:
    """Sort key placing grid cells before coordinate tuples."""
    if isinstance(x, int):
        return (0, (x,))
    return (1, x)


@dataclass(frozen=True)
class Label:
    """Provisional target identity ``(birth_time, index)``.

    Equality is componentwise.  There is no ``<``: use :attr:`key` when a
    reproducible order is needed.
    """

    birth_time: int
    index: int

    def __post_init__(self):
        if not isinstance(self.birth_time, int) or self.birth_time < 0:
            raise MalformedInputError(f"label birth time must be a natural number, got {self.birth_time!r}")
        if not isinstance(self.index, int) or self.index < 1:
            raise MalformedInputError(f"label index must be >= 1, got {self.index!r}")

    @property
    def key(self) -> tuple[int, int]:
        return (self.birth_time, self.index)

    def __str__(self):
        return f"{self.birth_time}:{self.index}"

    @classmethod
    def parse(cls, text: str) -> "Label":
        try:
            k, i = text.split(":")
            return cls(int(k), int(i))
        except ValueError as exc:
            raise MalformedInputError(f"bad label {text!r}, expected 'k:i'") from exc


@dataclass(frozen=True)
class LabeledState:
    """One target ``(x, label, time)``."""

    x: KinematicState
    label: Label
    time: int

    def __post_init__(self):
        object.__setattr__(self, "x", kinematic_state(self.x))
        if not isinstance(self.label, Label):
            raise MalformedInputError(f"expected a Label, got {self.label!r}")
        if not isinstance(self.time, int) or self.time < 0:
            raise MalformedInputError(f"time index must be a natural number, got {self.time!r}")

    @property
    def key(self) -> tuple:
        return (self.label.key, state_key(self.x))


def _as_states(X, time=None) -> list[LabeledState]:
    out = []
    for e in X:
        if isinstance(e, LabeledState):
            out.append(e)
        elif len(e) == 3:
            out.append(LabeledState(e[0], e[1], e[2]))
        elif len(e) == 2:
            if time is None:
                raise MalformedInputError("(x, label) pairs need an explicit time")
            out.append(LabeledState(e[0], e[1], time))
        else:
            raise MalformedInputError(f"cannot interpret {e!r} as a labeled state")
    return out


def is_labeled(X: Iterable) -> bool:
    """True iff the distinct elements of ``X`` carry pairwise distinct labels.

    ``X`` holds :class:`LabeledState` objects or ``(x, label, time)`` triples
    sharing one time index.  Repeated identical elements count once (set
    semantics); two elements that share a kinematic state but not a label
    are allowed.  Time-free ``(x, label)`` pairs are accepted too.
    """
    elements = set()
    times = set()
    for e in X:
        if isinstance(e, LabeledState):
            elements.add((e.x, e.label))
            times.add(e.time)
        elif len(e) == 3:
            elements.add((kinematic_state(e[0]), e[1]))
            times.add(e[2])
        else:
            elements.add((kinematic_state(e[0]), e[1]))
    if len(times) > 1:
        raise MalformedInputError("labeled-set elements must share one time index")
    return len({lab for _, lab in elements}) == len(elements)


def labels_of(X: Iterable) -> frozenset:
    """Projection of a set of labeled states (or ``(x, label)`` pairs) onto labels."""
    out = set()
    for e in X:
        out.add(e.label if isinstance(e, LabeledState) else e[1])
    return frozenset(out)


class LabeledSet:
    """Finite set of labeled states at one time index, with distinct labels.

    Construction rejects sets that repeat a label.  Iteration follows the
    canonical label order.
    """

    __slots__ = ("_time", "_elements", "_ordered")

    def __init__(self, elements: Iterable = (), time: int | None = None):
        states = set(_as_states(elements, time))
        times = {s.time for s in states}
        if len(times) > 1:
            raise MalformedInputError(f"mixed time indices {sorted(times)}")
        if time is None:
            if not times:
                raise MalformedInputError("an empty labeled set needs an explicit time")
            time = times.pop()
        elif times and times != {time}:
            raise MalformedInputError(f"elements at time {times.pop()} but set time is {time}")
        if len({s.label for s in states}) != len(states):
            raise NotLabeledError("two elements share a label: |labels(X)| != |X|")
        self._time = int(time)
        self._elements = frozenset(states)
        self._ordered = tuple(sorted(states, key=lambda s: s.key))

    @classmethod
    def from_pairs(cls, pairs: Iterable, time: int) -> "LabeledSet":
        return cls(((x, lab, time) for x, lab in pairs), time=time)

    @property
    def time(self) -> int:
        return self._time

    @property
    def elements(self) -> frozenset:
        return self._elements

    @property
    def labels(self) -> frozenset:
        return frozenset(s.label for s in self._elements)

    def pairs(self) -> frozenset:
        """The set as ``(x, label)`` pairs."""
        return frozenset((s.x, s.label) for s in self._elements)

    def state_of(self, label: Label) -> KinematicState | None:
        for s in self._ordered:
            if s.label == label:
                return s.x
        return None

    def union(self, other: "LabeledSet") -> "LabeledSet":
        if other.time != self.time:
            raise MalformedInputError("cannot union labeled sets at different times")
        return LabeledSet(self._elements | other._elements, time=self.time)

    def __iter__(self) -> Iterator[LabeledState]:
        return iter(self._ordered)

    def __len__(self):
        return len(self._elements)

    def __contains__(self, item):
        return item in self._elements

    def __eq__(self, other):
        if not isinstance(other, LabeledSet):
            return NotImplemented
        return self._time == other._time and self._elements == other._elements

    def __hash__(self):
        return hash((self._time, self._elements))

    def __repr__(self):
        body = ", ".join(f"({s.x!r}, {s.label})" for s in self._ordered)
        return f"LabeledSet(time={self._time}, {{{body}}})"


@dataclass(frozen=True)
class TrackSegment:
    """``(label, start_time, states)``: one label on consecutive time steps."""

    label: Label
    start_time: int
    states: tuple

    def __post_init__(self):
        states = tuple(kinematic_state(x) for x in self.states)
        if not states:
            raise MalformedInputError("a track segment has length >= 1")
        if not isinstance(self.start_time, int) or self.start_time < 0:
            raise MalformedInputError(f"bad start time {self.start_time!r}")
        object.__setattr__(self, "states", states)

    @property
    def length(self) -> int:
        return len(self.states)

    @property
    def end_time(self) -> int:
        return self.start_time + len(self.states) - 1

    def times(self) -> range:
        return range(self.start_time, self.end_time + 1)

    def check_horizon(self, k_max: int) -> None:
        if self.end_time > k_max:
            raise MalformedInputError(f"segment ends at {self.end_time} > k_max={k_max}")

    @property
    def key(self) -> tuple:
        return (self.label.key, self.start_time, tuple(state_key(x) for x in self.states))


def segment_from_states(states: Sequence[LabeledState]) -> TrackSegment:
    """Re-notate ``((x1, l, k), ..., (xi, l, k+i-1))`` as ``(l, k, x^{1:i})``."""
    states = list(states)
    if not states:
        raise MalformedInputError("empty state sequence")
    label = states[0].label
    for prev, cur in zip(states, states[1:]):
        if cur.label != label:
            raise MalformedInputError(f"label mismatch: {label} vs {cur.label}")
        if cur.time != prev.time + 1:
            raise MalformedInputError(f"non-consecutive times {prev.time} -> {cur.time}")
    return TrackSegment(label, states[0].time, tuple(s.x for s in states))


def segment_to_states(segment: TrackSegment) -> tuple:
    return tuple(
        LabeledState(x, segment.label, segment.start_time + j)
        for j, x in enumerate(segment.states)
    )


@dataclass(frozen=True)
class LTrajectory:
    """Per-time slices of one label: each entry a state or ``None`` (empty).

    ``per_time[j]`` is the slice at time ``first_time + j``.
    """

    label: Label
    per_time: tuple
    first_time: int = 1

    def __post_init__(self):
        object.__setattr__(
            self,
            "per_time",
            tuple(None if x is None else kinematic_state(x) for x in self.per_time),
        )

    def slice_at(self, time: int):
        j = time - self.first_time
        if 0 <= j < len(self.per_time):
            return self.per_time[j]
        return None


def segments_of(traj: LTrajectory) -> list[TrackSegment]:
    """Maximal runs of consecutive nonempty entries, in time order."""
    segments = []
    run_start, run = None, []
    for j, x in enumerate(traj.per_time + (None,)):
        if x is None:
            if run:
                segments.append(TrackSegment(traj.label, traj.first_time + run_start, tuple(run)))
            run_start, run = None, []
        else:
            if not run:
                run_start = j
            run.append(x)
    return segments


# -- record serialization ---------------------------------------------------

def _state_to_json(x):
    return x if isinstance(x, int) else list(x)


def _state_from_json(v):
    return int(v) if isinstance(v, int) else tuple(float(c) for c in v)


def to_record(obj) -> dict:
    """One JSON-compatible record for a labeled set or track segment."""
    if isinstance(obj, LabeledSet):
        return {
            "kind": "labeled_set",
            "time": obj.time,
            "elements": [{"label": str(s.label), "x": _state_to_json(s.x)} for s in obj],
        }
    if isinstance(obj, TrackSegment):
        return {
            "kind": "track_segment",
            "label": str(obj.label),
            "start": obj.start_time,
            "states": [_state_to_json(x) for x in obj.states],
        }
    # trajectories are handled by trajectory_repr, imported lazily to avoid a cycle
    from .trajectory_repr import trajectory_to_record

    return trajectory_to_record(obj)


def from_record(rec: dict):
    kind = rec.get("kind")
    if kind == "labeled_set":
        return LabeledSet(
            ((_state_from_json(e["x"]), Label.parse(e["label"])) for e in rec["elements"]),
            time=rec["time"],
        )
    if kind == "track_segment":
        return TrackSegment(
            Label.parse(rec["label"]),
            rec["start"],
            tuple(_state_from_json(v) for v in rec["states"]),
        )
    from .trajectory_repr import trajectory_from_record

    return trajectory_from_record(rec)


def dumps_records(objs: Iterable) -> str:
    """Serialize objects as line-delimited JSON, one record per line."""
    return "".join(json.dumps(to_record(o), sort_keys=True) + "\n" for o in objs)


def loads_records(text: str) -> list:
    return [from_record(json.loads(line)) for line in text.splitlines() if line.strip()]

