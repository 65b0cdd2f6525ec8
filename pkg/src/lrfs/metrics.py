"""Optimal-assignment distance between labeled sets, and the tuple counterexample.

The base distance between two labeled states is
``min(c, ||x - y|| + alpha * [labels differ])``; the set distance is the
OSPA construction on top of it.  Assignments are solved exactly by
enumeration for small sets and by the Hungarian method otherwise.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import MalformedInputError
from .state_model import LabeledSet, LabeledState

__all__ = [
    "AssignmentMetricParams",
    "base_distance",
    "cost_matrix",
    "set_distance",
    "tuple_distance",
    "TupleDemoReport",
    "tuple_representation_demo",
]

EXHAUSTIVE_MAX = 8


@dataclass(frozen=True)
class AssignmentMetricParams:
    """Cutoff ``c``, order ``p`` and label-mismatch penalty ``alpha``."""

    cutoff: float = 10.0
    order: float = 1.0
    label_penalty: float = 2.0

    def __post_init__(self):
        if not self.cutoff > 0:
            raise MalformedInputError(f"cutoff must be > 0, got {self.cutoff}")
        if not self.order >= 1:
            raise MalformedInputError(f"order must be >= 1, got {self.order}")
        if not 0 <= self.label_penalty <= self.cutoff:
            raise MalformedInputError(f"label penalty must lie in [0, cutoff], got {self.label_penalty}")


def _coords(x) -> np.ndarray:
    if isinstance(x, int):
        return np.array([float(x)])
    return np.asarray(x, dtype=float)


def base_distance(a: LabeledState, b: LabeledState, params: AssignmentMetricParams) -> float:
    xa, xb = _coords(a.x), _coords(b.x)
    if xa.shape != xb.shape:
        raise MalformedInputError(f"dimension mismatch {xa.size} vs {xb.size}")
    d = float(np.linalg.norm(xa - xb)) + (params.label_penalty if a.label != b.label else 0.0)
    return min(params.cutoff, d)


def cost_matrix(A: Sequence[LabeledState], B: Sequence[LabeledState], params: AssignmentMetricParams) -> np.ndarray:
    """``base_distance ** p`` for every pair."""
    C = np.empty((len(A), len(B)))
    for i, a in enumerate(A):
        for j, b in enumerate(B):
            C[i, j] = base_distance(a, b, params) ** params.order
    return C


def _min_assignment(C: np.ndarray, method: str) -> float:
    """Minimum total cost of matching every row of ``C`` (rows <= columns)."""
    n, m = C.shape
    if n == 0:
        return 0.0
    if method == "exhaustive":
        rows = np.arange(n)
        return min(math.fsum(C[rows, list(cols)]) for cols in itertools.permutations(range(m), n))
    r, c = linear_sum_assignment(C)
    return math.fsum(C[r, c])


def set_distance(
    A: LabeledSet,
    B: LabeledSet,
    params: AssignmentMetricParams = AssignmentMetricParams(),
    method: str = "auto",
) -> float:
    """OSPA-style distance between two labeled sets.

    Parameters
    ----------
    method : {"auto", "exhaustive", "hungarian"}
        ``auto`` enumerates assignments when the smaller set has at most
        eight elements.
    """
    a, b = list(A), list(B)
    if len(a) > len(b):
        a, b = b, a
    n, m = len(a), len(b)
    if m == 0:
        return 0.0
    if method == "auto":
        method = "exhaustive" if m <= EXHAUSTIVE_MAX else "hungarian"
    if method not in ("exhaustive", "hungarian"):
        raise ValueError(f"unknown assignment method {method!r}")
    c, p = params.cutoff, params.order
    cost = _min_assignment(cost_matrix(a, b, params), method)
    value = ((cost + c**p * (m - n)) / m) ** (1.0 / p)
    return min(value, c)


def tuple_distance(u: Sequence[LabeledState], v: Sequence[LabeledState], params: AssignmentMetricParams = AssignmentMetricParams()) -> float:
    """Position-by-position distance of two equal-length ordered tuples."""
    if len(u) != len(v):
        raise MalformedInputError("tuples must have equal length")
    if not u:
        return 0.0
    p = params.order
    return math.fsum(base_distance(a, b, params) ** p for a, b in zip(u, v)) ** (1.0 / p)


@dataclass(frozen=True)
class TupleDemoReport:
    permutation: tuple
    tuple_distance: float
    set_distance: float

    @property
    def witnesses_ill_defined_tuple_metric(self) -> bool:
        return self.tuple_distance > 0.0 and self.set_distance == 0.0


def tuple_representation_demo(
    population: Sequence[LabeledState],
    permutation: Sequence[int],
    params: AssignmentMetricParams = AssignmentMetricParams(),
) -> TupleDemoReport:
    """Compare one population against a reordering of itself, as tuples and as sets."""
    population = list(population)
    perm = tuple(int(i) for i in permutation)
    if sorted(perm) != list(range(len(population))):
        raise MalformedInputError(f"{perm} is not a permutation of {len(population)} items")
    if len(set(population)) != len(population):
        raise MalformedInputError("population elements must be distinct")
    reordered = [population[i] for i in perm]
    time = population[0].time if population else 0
    return TupleDemoReport(
        perm,
        tuple_distance(reordered, population, params),
        set_distance(LabeledSet(reordered, time=time), LabeledSet(population, time=time), params),
    )
