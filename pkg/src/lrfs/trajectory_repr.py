"""Unlabeled trajectories, sets of trajectories, and what labels add to them.

A :class:`Trajectory` is ``(start_time, states)`` with no label; a set of
them (an SoT) is a plain ``frozenset``.  :func:`strip_labels` and
:func:`restore_labels` move between labeled track segments and SoTs, and
the remaining functions audit SoTs for physical consistency and count the
distinct physical readings an SoT admits.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import (
    CombinatorialCapError,
    InconsistentRestorationError,
    InconsistentSoTError,
    MalformedInputError,
)
from .state_model import Label, TrackSegment, kinematic_state, state_key

__all__ = [
    "Trajectory",
    "LabeledSoT",
    "Consistency",
    "SPLIT",
    "DUPLICATE",
    "sot",
    "strip_labels",
    "restore_labels",
    "physical_support",
    "is_physically_consistent",
    "time_disjoint",
    "count_interpretations",
    "enumerate_interpretations",
    "trajectory_to_record",
    "trajectory_from_record",
]

SPLIT = "SPLIT"
DUPLICATE = "DUPLICATE"

DEFAULT_PARTITION_CAP = 10_000
DEFAULT_CHAIN_CAP = 100_000


@dataclass(frozen=True)
class Trajectory:
    """``(k, x^{1:i})``: states at consecutive times ``k, ..., k+i-1``."""

    start_time: int
    states: tuple

    def __post_init__(self):
        if not isinstance(self.start_time, int) or self.start_time < 0:
            raise MalformedInputError(f"trajectory start time must be a natural number, got {self.start_time!r}")
        states = tuple(kinematic_state(x) for x in self.states)
        if not states:
            raise MalformedInputError("a trajectory has length >= 1")
        object.__setattr__(self, "states", states)

    @property
    def length(self) -> int:
        return len(self.states)

    @property
    def end_time(self) -> int:
        return self.start_time + len(self.states) - 1

    def support(self) -> tuple:
        """``((k, x^1), (k+1, x^2), ...)``."""
        return tuple((self.start_time + j, x) for j, x in enumerate(self.states))

    def check_horizon(self, k_max: int) -> None:
        if self.end_time > k_max:
            raise MalformedInputError(f"trajectory ends at {self.end_time} > k_max={k_max}")

    @property
    def key(self) -> tuple:
        return (self.start_time, tuple(state_key(x) for x in self.states))


def sot(trajectories: Iterable) -> frozenset:
    """Build an SoT from trajectories or ``(start, states)`` pairs."""
    return frozenset(t if isinstance(t, Trajectory) else Trajectory(t[0], tuple(t[1])) for t in trajectories)


def _overlap(a, b) -> bool:
    return a.start_time <= b.end_time and b.start_time <= a.end_time


def time_disjoint(a, b) -> bool:
    """True iff two trajectories (or segments) share no time index."""
    return not _overlap(a, b)


class LabeledSoT(frozenset):
    """Set of labeled track segments; segments sharing a label never overlap in time."""

    def __new__(cls, segments: Iterable[TrackSegment] = ()):
        segments = frozenset(segments)
        by_label: dict = {}
        for seg in segments:
            if not isinstance(seg, TrackSegment):
                raise MalformedInputError(f"{seg!r} is not a TrackSegment")
            by_label.setdefault(seg.label, []).append(seg)
        for lab, segs in by_label.items():
            for a, b in itertools.combinations(segs, 2):
                if _overlap(a, b):
                    raise InconsistentRestorationError(
                        f"label {lab} is on two segments overlapping in time ({a.start_time}-{a.end_time}"
                        f" and {b.start_time}-{b.end_time})"
                    )
        return super().__new__(cls, segments)

    def ordered(self) -> list:
        return sorted(self, key=lambda s: s.key)


def strip_labels(L: Iterable[TrackSegment]) -> frozenset:
    """Forget labels.  Segments that differ only in label collapse to one trajectory."""
    return frozenset(Trajectory(seg.start_time, seg.states) for seg in L)


def restore_labels(T: Iterable[Trajectory], assignment: Mapping) -> LabeledSoT:
    """Attach a label to every trajectory.

    Raises
    ------
    InconsistentRestorationError
        If one label lands on two trajectories that overlap in time.
    """
    T = sot(T)
    missing = [t for t in T if t not in assignment]
    if missing:
        raise MalformedInputError(f"no label assigned to {len(missing)} trajectories")
    segments = []
    for t in T:
        lab = assignment[t]
        if not isinstance(lab, Label):
            raise MalformedInputError(f"{lab!r} is not a Label")
        segments.append(TrackSegment(lab, t.start_time, t.states))
    return LabeledSoT(segments)


def physical_support(T: Iterable[Trajectory]) -> Counter:
    """Multiset of ``(time, state)`` points visited by an SoT."""
    out = Counter()
    for t in T:
        out.update(t.support())
    return out


@dataclass(frozen=True)
class Consistency:
    """Result of :func:`is_physically_consistent`.

    ``diagnostics`` holds ``(code, detail)`` pairs; truthiness is ``consistent``.
    """

    consistent: bool
    diagnostics: tuple = ()

    def __bool__(self):
        return self.consistent

    @property
    def codes(self) -> tuple:
        return tuple(code for code, _ in self.diagnostics)


def _chains(trajs: list, cap: int):
    """Every sequence of trajectories where each starts the step after the previous ends."""
    successors = {
        i: [j for j, b in enumerate(trajs) if b.start_time == a.end_time + 1]
        for i, a in enumerate(trajs)
    }
    stack = [(i,) for i in range(len(trajs))]
    count = 0
    while stack:
        path = stack.pop()
        count += 1
        if count > cap:
            raise CombinatorialCapError(f"more than {cap} trajectory chains")
        yield path
        stack.extend(path + (j,) for j in successors[path[-1]])


def is_physically_consistent(T: Iterable[Trajectory], chain_cap: int = DEFAULT_CHAIN_CAP) -> Consistency:
    """Check an SoT against the two impossibilities of unlabeled trajectories.

    * ``DUPLICATE``: two disjoint groups of trajectories, each chained
      end-to-start in time, trace the same physical trajectory.
    * ``SPLIT``: two distinct trajectories pass through the same
      ``(time, state)`` point, so one target would be in two futures.
    """
    trajs = sorted(sot(T), key=lambda t: t.key)
    diagnostics = []

    seen: dict = {}
    for path in _chains(trajs, chain_cap):
        start = trajs[path[0]].start_time
        states = tuple(x for i in path for x in trajs[i].states)
        sig = (start, states)
        members = frozenset(path)
        for other in seen.get(sig, ()):
            if not members & other:
                a = " + ".join(_fmt(trajs[i]) for i in sorted(other))
                b = " + ".join(_fmt(trajs[i]) for i in path)
                diagnostics.append((DUPLICATE, f"{a} and {b} are two instances of one physical trajectory"))
        seen.setdefault(sig, []).append(members)

    where: dict = {}
    for i, t in enumerate(trajs):
        for point in t.support():
            where.setdefault(point, []).append(i)
    for point, idx in sorted(where.items(), key=lambda kv: (kv[0][0], state_key(kv[0][1]))):
        if len(idx) > 1:
            names = ", ".join(_fmt(trajs[i]) for i in idx)
            diagnostics.append((SPLIT, f"{names} share the point (time={point[0]}, x={point[1]!r})"))

    diagnostics.sort(key=lambda d: d[0] != DUPLICATE)
    return Consistency(not diagnostics, tuple(diagnostics))


def _fmt(t: Trajectory) -> str:
    return f"({t.start_time}, {list(t.states)})"


def _partitions(trajs: list, cap: int):
    """Set partitions whose blocks are pairwise time-disjoint, in canonical order."""
    n = len(trajs)
    count = 0

    def rec(i, blocks):
        nonlocal count
        if i == n:
            count += 1
            if count > cap:
                raise CombinatorialCapError(f"more than {cap} interpretations")
            yield [list(b) for b in blocks]
            return
        t = trajs[i]
        for b in blocks:
            if all(time_disjoint(t, trajs[j]) for j in b):
                b.append(i)
                yield from rec(i + 1, blocks)
                b.pop()
        blocks.append([i])
        yield from rec(i + 1, blocks)
        blocks.pop()

    yield from rec(0, [])


def enumerate_interpretations(T: Iterable[Trajectory], cap: int = DEFAULT_PARTITION_CAP) -> list[LabeledSoT]:
    """Every labeling of ``T`` as one or more targets' segment histories.

    Each reading groups trajectories into targets; a target's trajectories
    must be pairwise time-disjoint.  Labels are ``(0, 1), (0, 2), ...`` in
    block order.  No motion-model plausibility gating is applied.
    """
    T = sot(T)
    check = is_physically_consistent(T)
    if not check:
        raise InconsistentSoTError("; ".join(d for _, d in check.diagnostics))
    trajs = sorted(T, key=lambda t: t.key)
    out = []
    for blocks in _partitions(trajs, cap):
        assignment = {trajs[j]: Label(0, b + 1) for b, block in enumerate(blocks) for j in block}
        out.append(restore_labels(trajs, assignment))
    return out


def count_interpretations(T: Iterable[Trajectory], cap: int = DEFAULT_PARTITION_CAP) -> int:
    """Number of distinct physical readings of an SoT (1 means unambiguous)."""
    T = sot(T)
    check = is_physically_consistent(T)
    if not check:
        raise InconsistentSoTError("; ".join(d for _, d in check.diagnostics))
    trajs = sorted(T, key=lambda t: t.key)
    return sum(1 for _ in _partitions(trajs, cap))


def _state_to_json(x):
    return x if isinstance(x, int) else list(x)


def trajectory_to_record(obj) -> dict:
    if isinstance(obj, Trajectory):
        return {
            "kind": "trajectory",
            "start": obj.start_time,
            "states": [_state_to_json(x) for x in obj.states],
        }
    raise TypeError(f"no record format for {type(obj).__name__}")


def trajectory_from_record(rec: dict) -> Trajectory:
    if rec.get("kind") != "trajectory":
        raise MalformedInputError(f"unknown record kind {rec.get('kind')!r}")
    return Trajectory(
        rec["start"],
        tuple(int(v) if isinstance(v, int) else tuple(float(c) for c in v) for v in rec["states"]),
    )
