"""Labeled multi-Bernoulli and labeled-space Poisson densities on a finite grid.

Spatial distributions are probability mass functions over grid cells
``0..num_cells-1``, so every set integral is a finite sum.  A *cell set* is a
``frozenset`` of ``(cell, Label)`` pairs; it may or may not be labeled.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import EnumerationBoundError, MalformedInputError
from .state_model import Label, LabeledSet

__all__ = [
    "DEFAULT_MAX_LABELS",
    "DEFAULT_MAX_CELLS",
    "LmbParams",
    "IntensityFunction",
    "CardinalityPmf",
    "cell_set",
    "canonical_key",
    "lmb_density",
    "enumerate_lmb",
    "lmb_normalization",
    "lmb_sample",
    "lmb_sample_batch",
    "labeled_poisson_density",
    "cardinality_pmf",
]

DEFAULT_MAX_LABELS = 6
DEFAULT_MAX_CELLS = 32

PMF_ATOL = 1e-12


def cell_set(X) -> frozenset:
    """Coerce a :class:`LabeledSet` or an iterable of ``(cell, label)`` pairs."""
    if isinstance(X, LabeledSet):
        return X.pairs()
    return frozenset((int(c), lab) for c, lab in X)


def canonical_key(X: Iterable) -> tuple:
    """Deterministic sort key of a cell set: its elements in label order."""
    return tuple(sorted((lab.key, c) for c, lab in X))


def _labels(X) -> set:
    return {lab for _, lab in X}


@dataclass(frozen=True, eq=False)
class LmbParams:
    """Parameters ``{(q_l, s_l) : l in J}`` of a labeled multi-Bernoulli density.

    Parameters
    ----------
    existence : mapping Label -> float
        Existence probability of each label.
    spatial : mapping Label -> array_like
        Spatial PMF over the grid for each label; each must sum to 1.
    """

    existence: Mapping
    spatial: Mapping
    num_cells: int = field(init=False)

    def __post_init__(self):
        if set(self.existence) != set(self.spatial):
            raise MalformedInputError("existence and spatial must share one label set")
        labels = sorted(self.existence, key=lambda lab: lab.key)
        q = {}
        s = {}
        sizes = set()
        for lab in labels:
            if not isinstance(lab, Label):
                raise MalformedInputError(f"{lab!r} is not a Label")
            qv = float(self.existence[lab])
            if not 0.0 <= qv <= 1.0:
                raise MalformedInputError(f"existence probability of {lab} is {qv}, outside [0, 1]")
            sv = np.asarray(self.spatial[lab], dtype=float)
            if sv.ndim != 1 or np.any(sv < 0) or not np.all(np.isfinite(sv)):
                raise MalformedInputError(f"spatial PMF of {lab} must be a nonnegative vector")
            if abs(math.fsum(sv) - 1.0) > PMF_ATOL:
                raise MalformedInputError(f"spatial PMF of {lab} sums to {math.fsum(sv)!r}, not 1")
            sv.setflags(write=False)
            q[lab] = qv
            s[lab] = sv
            sizes.add(sv.size)
        if len(sizes) > 1:
            raise MalformedInputError(f"spatial PMFs have different grid sizes {sorted(sizes)}")
        object.__setattr__(self, "existence", q)
        object.__setattr__(self, "spatial", s)
        object.__setattr__(self, "num_cells", sizes.pop() if sizes else 0)

    @classmethod
    def empty(cls, num_cells: int = 0) -> "LmbParams":
        p = cls({}, {})
        object.__setattr__(p, "num_cells", num_cells)
        return p

    @property
    def labels(self) -> tuple:
        """Labels in canonical order."""
        return tuple(self.existence)

    def __len__(self):
        return len(self.existence)


def lmb_density(params: LmbParams, X) -> float:
    """Evaluate the LMB density at the cell set ``X``.

    Zero unless ``X`` is labeled and its labels are a subset of the
    parameter label set.
    """
    X = cell_set(X)
    labels = _labels(X)
    if len(labels) != len(X) or not labels <= params.existence.keys():
        return 0.0
    value = 1.0
    for lab in params.labels:
        if lab not in labels:
            value *= 1.0 - params.existence[lab]
    for c, lab in X:
        s = params.spatial[lab]
        if not 0 <= c < s.size:
            return 0.0
        value *= params.existence[lab] * s[c]
    return value


def _check_bounds(params: LmbParams, max_labels: int, max_cells: int) -> None:
    if len(params) > max_labels:
        raise EnumerationBoundError(f"{len(params)} labels exceed the enumeration bound {max_labels}")
    if params.num_cells > max_cells:
        raise EnumerationBoundError(f"{params.num_cells} cells exceed the enumeration bound {max_cells}")


def enumerate_lmb(
    params: LmbParams,
    *,
    nonzero_only: bool = True,
    max_labels: int = DEFAULT_MAX_LABELS,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> Iterator[tuple[frozenset, float]]:
    """Yield ``(X, f(X))`` for labeled cell sets with labels in ``J``.

    With ``nonzero_only`` (the default) only cells of positive spatial mass
    are visited, which is all that a filter needs.  Order is canonical.
    """
    _check_bounds(params, max_labels, max_cells)
    labels = params.labels
    q = params.existence
    for r in range(len(labels) + 1):
        for subset in itertools.combinations(labels, r):
            miss = 1.0
            for lab in labels:
                if lab not in subset:
                    miss *= 1.0 - q[lab]
            if nonzero_only and miss == 0.0:
                continue
            choices = []
            for lab in subset:
                s = params.spatial[lab]
                cells = np.flatnonzero(s) if nonzero_only else range(s.size)
                choices.append([(int(c), q[lab] * s[c]) for c in cells])
            for combo in itertools.product(*choices):
                w = miss
                for _, v in combo:
                    w *= v
                if nonzero_only and w == 0.0:
                    continue
                yield frozenset((c, lab) for (c, _), lab in zip(combo, subset)), w


def lmb_normalization(
    params: LmbParams,
    *,
    max_labels: int = DEFAULT_MAX_LABELS,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> float:
    """Total LMB mass over every labeled set on the grid, by exhaustive enumeration.

    Every one of the ``(1 + G)^|J|`` terms is materialized (as an outer
    product per label subset) and summed with :func:`math.fsum`.
    """
    _check_bounds(params, max_labels, max_cells)
    labels = params.labels
    q = params.existence
    total = []
    for r in range(len(labels) + 1):
        for subset in itertools.combinations(labels, r):
            miss = math.prod(1.0 - q[lab] for lab in labels if lab not in subset)
            terms = np.array(miss)
            for lab in subset:
                terms = np.multiply.outer(terms, q[lab] * params.spatial[lab])
            total.extend(np.ravel(terms).tolist())
    return math.fsum(total)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def lmb_sample(params: LmbParams, seed, time: int = 0) -> LabeledSet:
    """Draw one labeled set: each label independently, then its cell.

    ``seed`` is an integer or a :class:`numpy.random.Generator` (which is
    advanced in place).
    """
    rng = _rng(seed)
    pairs = []
    for lab in params.labels:
        if rng.random() < params.existence[lab]:
            s = params.spatial[lab]
            pairs.append((int(rng.choice(s.size, p=s)), lab))
    return LabeledSet.from_pairs(pairs, time)


def lmb_sample_batch(params: LmbParams, num: int, seed) -> np.ndarray:
    """Vectorized draws, returned as an ``(num, |J|)`` integer array.

    Column ``j`` holds the cell of the ``j``-th label (canonical order) or
    ``-1`` when that label is absent.
    """
    rng = _rng(seed)
    out = np.full((num, len(params)), -1, dtype=np.int64)
    for j, lab in enumerate(params.labels):
        present = rng.random(num) < params.existence[lab]
        cdf = np.cumsum(params.spatial[lab])
        cells = np.searchsorted(cdf, rng.random(num) * cdf[-1], side="right")
        cells = np.minimum(cells, cdf.size - 1)
        out[present, j] = cells[present]
    return out


@dataclass(frozen=True)
class IntensityFunction:
    """Nonnegative intensity ``D(cell, label)``; absent keys are zero."""

    values: Mapping

    def __post_init__(self):
        vals = {}
        for (c, lab), v in self.values.items():
            v = float(v)
            if not (v >= 0.0 and math.isfinite(v)):
                raise MalformedInputError(f"intensity at ({c}, {lab}) is {v}")
            vals[(int(c), lab)] = v
        object.__setattr__(self, "values", vals)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.values.values())

    def __call__(self, cell, label) -> float:
        return self.values.get((int(cell), label), 0.0)


def labeled_poisson_density(D: IntensityFunction, X) -> float:
    """Poisson density ``exp(-sum D) * prod D(x, l)`` on the labeled space.

    No labeled-set check is made, so sets that repeat a label generally get
    positive density.
    """
    value = math.exp(-D.total_mass)
    for c, lab in cell_set(X):
        value *= D(c, lab)
    return value


@dataclass(frozen=True, eq=False)
class CardinalityPmf:
    """Probability ``p[n]`` that exactly ``n`` targets are present."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0 or np.any(p < 0):
            raise MalformedInputError("cardinality PMF must be a nonempty nonnegative vector")
        if abs(math.fsum(p) - 1.0) > 1e-9:
            raise MalformedInputError(f"cardinality PMF sums to {math.fsum(p)!r}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def __getitem__(self, n: int) -> float:
        return float(self.p[n]) if 0 <= n < self.p.size else 0.0

    def mean(self) -> float:
        return math.fsum(n * v for n, v in enumerate(self.p))

    def tail(self, n: int) -> float:
        """``P(N >= n)``."""
        return math.fsum(self.p[n:])


def cardinality_pmf(density, **bounds) -> CardinalityPmf:
    """Cardinality distribution of an enumerable labeled density.

    ``density`` is :class:`LmbParams`, an object with a ``support`` mapping
    (such as a filter posterior), or a mapping from cell sets to
    probabilities.
    """
    if isinstance(density, LmbParams):
        items = enumerate_lmb(density, **bounds)
    elif hasattr(density, "support"):
        items = density.support.items()
    else:
        items = density.items()
    buckets: dict[int, list] = {}
    for X, w in items:
        buckets.setdefault(len(X), []).append(w)
    size = max(buckets, default=0) + 1
    return CardinalityPmf(np.array([math.fsum(buckets.get(n, [0.0])) for n in range(size)]))
