"""Exact labeled multitarget Bayes filter on a finite grid.

The posterior is held as an explicit mapping from labeled cell sets to
probabilities.  Prediction uses independent survival and a per-cell
transition kernel plus LMB births; the update uses the standard
point-detection likelihood (Bernoulli detection, Poisson clutter uniform
over a finite measurement alphabet, sum over association hypotheses).
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .distributions import (
    DEFAULT_MAX_CELLS,
    DEFAULT_MAX_LABELS,
    CardinalityPmf,
    LmbParams,
    canonical_key,
    cardinality_pmf,
    enumerate_lmb,
)
from .errors import (
    ConfigurationError,
    DegenerateUpdateError,
    EnumerationBoundError,
    MalformedInputError,
    NotLabeledError,
)
from .state_model import LabeledSet, LTrajectory, is_labeled

__all__ = [
    "EnumerationLimits",
    "LabeledPosterior",
    "MotionModel",
    "SensorModel",
    "UnlabeledPhd",
    "predict",
    "update",
    "measurement_likelihood",
    "phd_from_posterior",
    "expected_cardinality",
    "round_half_up",
    "phd_estimate",
    "cphd_cardinality_estimate",
    "map_labeled_estimate",
    "marginal_labeled_estimate",
    "extract_trajectories",
]

ROW_ATOL = 1e-12


@dataclass(frozen=True)
class EnumerationLimits:
    max_labels: int = DEFAULT_MAX_LABELS
    max_cells: int = DEFAULT_MAX_CELLS
    max_steps: int = 12
    max_support: int = 2_000_000


DEFAULT_LIMITS = EnumerationLimits()


def _check_stochastic(matrix, name) -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or np.any(m < 0) or not np.all(np.isfinite(m)):
        raise ConfigurationError(f"{name} must be a nonnegative matrix")
    bad = np.flatnonzero(np.abs(m.sum(axis=1) - 1.0) > ROW_ATOL)
    if bad.size:
        raise ConfigurationError(f"{name} rows {bad.tolist()} do not sum to 1")
    m.setflags(write=False)
    return m


def _check_probability(p, name) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError(f"{name}={p} outside [0, 1]")
    return p


@dataclass(frozen=True, eq=False)
class MotionModel:
    """Single-target dynamics and the birth schedule.

    Parameters
    ----------
    transition : (G, G) array_like
        ``transition[c, c2]`` is the probability of moving from ``c`` to ``c2``.
    p_survival : float
    births : mapping int -> LmbParams
        Birth LMB at each time step.  Labels born at time ``k`` must be ``(k, i)``.
    """

    transition: np.ndarray
    p_survival: float
    births: Mapping = field(default_factory=dict)

    def __post_init__(self):
        T = _check_stochastic(self.transition, "transition")
        if T.shape[0] != T.shape[1]:
            raise ConfigurationError(f"transition must be square, got {T.shape}")
        object.__setattr__(self, "transition", T)
        object.__setattr__(self, "p_survival", _check_probability(self.p_survival, "p_survival"))
        births = {}
        for k, params in self.births.items():
            for lab in params.labels:
                if lab.birth_time != k:
                    raise ConfigurationError(f"birth label {lab} scheduled at time {k}")
            if len(params) and params.num_cells != T.shape[0]:
                raise ConfigurationError(f"birth PMFs at time {k} have {params.num_cells} cells, grid has {T.shape[0]}")
            births[int(k)] = params
        object.__setattr__(self, "births", births)

    @property
    def num_cells(self) -> int:
        return self.transition.shape[0]

    def birth_at(self, k: int) -> LmbParams | None:
        return self.births.get(k)


@dataclass(frozen=True, eq=False)
class SensorModel:
    """Point-detection sensor over a finite measurement alphabet.

    Parameters
    ----------
    p_detection : float
    likelihood : (G, M) array_like
        ``likelihood[c, z]`` is the probability that a target in cell ``c``
        produces measurement ``z`` when detected.
    clutter_rate : float
        Poisson mean number of false alarms, uniform over the ``M`` symbols.
    """

    p_detection: float
    likelihood: np.ndarray
    clutter_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "p_detection", _check_probability(self.p_detection, "p_detection"))
        object.__setattr__(self, "likelihood", _check_stochastic(self.likelihood, "likelihood"))
        rate = float(self.clutter_rate)
        if not (rate >= 0.0 and math.isfinite(rate)):
            raise ConfigurationError(f"clutter_rate={rate} must be finite and >= 0")
        object.__setattr__(self, "clutter_rate", rate)

    @property
    def alphabet_size(self) -> int:
        return self.likelihood.shape[1]

    @property
    def clutter_intensity(self) -> float:
        return self.clutter_rate / self.alphabet_size

    def with_detection(self, p_detection: float) -> "SensorModel":
        return SensorModel(p_detection, self.likelihood, self.clutter_rate)


@dataclass(frozen=True)
class LabeledPosterior:
    """Exact labeled multitarget density at time ``time``.

    ``support`` maps cell sets (frozensets of ``(cell, Label)``) to
    probabilities; every key is a labeled set.
    """

    time: int
    support: Mapping
    num_cells: int
    label_universe: frozenset = frozenset()

    def __post_init__(self):
        universe = set(self.label_universe)
        for X in self.support:
            labels = {lab for _, lab in X}
            if len(labels) != len(X):
                raise NotLabeledError(f"posterior support contains the non-labeled set {sorted(X, key=lambda e: e[1].key)}")
            universe |= labels
        object.__setattr__(self, "label_universe", frozenset(universe))

    @classmethod
    def empty(cls, num_cells: int, time: int = 0) -> "LabeledPosterior":
        """Point mass on the empty set."""
        return cls(time, {frozenset(): 1.0}, num_cells)

    @classmethod
    def point_mass(cls, X, num_cells: int, time: int) -> "LabeledPosterior":
        X = frozenset((int(c), lab) for c, lab in X)
        return cls(time, {X: 1.0}, num_cells)

    @classmethod
    def from_lmb(cls, params: LmbParams, time: int) -> "LabeledPosterior":
        return cls(time, dict(enumerate_lmb(params)), params.num_cells, frozenset(params.labels))

    def total(self) -> float:
        return math.fsum(self.support.values())

    def live_labels(self) -> frozenset:
        out = set()
        for X in self.support:
            out.update(lab for _, lab in X)
        return frozenset(out)

    def items(self):
        """Support in canonical order."""
        return sorted(self.support.items(), key=lambda kv: canonical_key(kv[0]))

    def __len__(self):
        return len(self.support)


def predict(
    post: LabeledPosterior,
    model: MotionModel,
    limits: EnumerationLimits = DEFAULT_LIMITS,
) -> LabeledPosterior:
    """Chapman-Kolmogorov step from time ``k-1`` to ``k``.

    Each target survives independently with ``p_survival`` and moves by
    the transition kernel, keeping its label; then the time-``k`` birth LMB
    is superposed.
    """
    if model.num_cells != post.num_cells:
        raise ConfigurationError(f"motion model has {model.num_cells} cells, posterior has {post.num_cells}")
    k = post.time + 1
    births = model.birth_at(k)
    birth_terms = [(frozenset(), 1.0)]
    new_labels = frozenset()
    if births is not None and len(births):
        new_labels = frozenset(births.labels)
        clash = new_labels & post.label_universe
        if clash:
            raise ConfigurationError(f"birth labels {sorted(str(l) for l in clash)} already in use")
        birth_terms = list(enumerate_lmb(births, max_labels=limits.max_labels, max_cells=limits.max_cells))

    p_s = model.p_survival
    T = model.transition
    moves = {c: [(int(c2), p_s * T[c, c2]) for c2 in np.flatnonzero(T[c])] for c in range(post.num_cells)}

    survivors: dict[frozenset, float] = defaultdict(float)
    for X, w in post.items():
        elems = sorted(X, key=lambda e: e[1].key)
        options = []
        for c, lab in elems:
            opts = [((c2, lab), v) for c2, v in moves[c] if v > 0.0]
            if p_s < 1.0:
                opts.append((None, 1.0 - p_s))
            options.append(opts)
        for combo in itertools.product(*options):
            v = w
            for _, p in combo:
                v *= p
            survivors[frozenset(e for e, _ in combo if e is not None)] += v

    out: dict[frozenset, float] = defaultdict(float)
    for S, w in survivors.items():
        for B, wb in birth_terms:
            out[S | B] += w * wb
    live = max((len(X) for X in out), default=0)
    if live > limits.max_labels:
        raise EnumerationBoundError(f"{live} simultaneous labels exceed {limits.max_labels}")
    if len(out) > limits.max_support:
        raise EnumerationBoundError(f"predicted support {len(out)} exceeds {limits.max_support}")
    return LabeledPosterior(k, dict(out), post.num_cells, post.label_universe | new_labels)


def measurement_likelihood(Z: Sequence[int], cells: Sequence[int], sensor: SensorModel) -> float:
    """Multitarget likelihood ``g(Z | X)`` for targets at ``cells``.

    ``Z`` is a list of measurement symbols; repeated symbols are distinct
    detections.  Sums over every injective assignment of targets to
    measurements (or to missed detection); unassigned measurements are
    clutter.
    """
    Z = tuple(int(z) for z in Z)
    m = len(Z)
    p_d = sensor.p_detection
    kappa = sensor.clutter_intensity
    L = sensor.likelihood
    cells = tuple(cells)

    @lru_cache(maxsize=None)
    def assign(i: int, used: int) -> float:
        if i == len(cells):
            return kappa ** (m - bin(used).count("1"))
        total = 0.0
        if p_d < 1.0:
            total += (1.0 - p_d) * assign(i + 1, used)
        if p_d > 0.0:
            row = L[cells[i]]
            for j, z in enumerate(Z):
                if not used >> j & 1 and row[z] > 0.0:
                    total += p_d * row[z] * assign(i + 1, used | 1 << j)
        return total

    return math.exp(-sensor.clutter_rate) * assign(0, 0)


def update(prior: LabeledPosterior, Z: Sequence[int], sensor: SensorModel) -> LabeledPosterior:
    """Bayes update with the measurement list ``Z``.

    Raises
    ------
    DegenerateUpdateError
        If ``Z`` has zero likelihood under every hypothesis in the prior.
    """
    if sensor.likelihood.shape[0] != prior.num_cells:
        raise ConfigurationError("sensor likelihood rows do not match the grid")
    for z in Z:
        if not 0 <= int(z) < sensor.alphabet_size:
            raise MalformedInputError(f"measurement {z} outside alphabet of size {sensor.alphabet_size}")
    cache: dict[tuple, float] = {}
    weighted = []
    for X, w in prior.items():
        cells = tuple(sorted(c for c, _ in X))
        g = cache.get(cells)
        if g is None:
            g = cache[cells] = measurement_likelihood(Z, cells, sensor)
        if g > 0.0 and w > 0.0:
            weighted.append((X, w * g))
    norm = math.fsum(v for _, v in weighted)
    if not norm > 0.0:
        raise DegenerateUpdateError(f"measurements {list(Z)} have zero likelihood at time {prior.time}")
    return LabeledPosterior(
        prior.time, {X: v / norm for X, v in weighted}, prior.num_cells, prior.label_universe
    )


@dataclass(frozen=True, eq=False)
class UnlabeledPhd:
    """First-moment intensity over grid cells (unit: per cell volume)."""

    intensity: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.intensity, dtype=float)
        if d.ndim != 1 or np.any(d < 0):
            raise MalformedInputError("PHD must be a nonnegative vector")
        d.setflags(write=False)
        object.__setattr__(self, "intensity", d)


def phd_from_posterior(post: LabeledPosterior) -> UnlabeledPhd:
    """Exact first moment: expected number of targets in each cell."""
    terms: list[list[float]] = [[] for _ in range(post.num_cells)]
    for X, w in post.items():
        for c, _ in X:
            terms[c].append(w)
    return UnlabeledPhd(np.array([math.fsum(t) for t in terms]))


def _phd_array(D) -> np.ndarray:
    return D.intensity if isinstance(D, UnlabeledPhd) else np.asarray(D, dtype=float)


def expected_cardinality(D) -> float:
    return math.fsum(_phd_array(D))


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def phd_estimate(D) -> frozenset:
    """Cells of the ``round(N)`` largest PHD values (ties: lower cell first).

    Only cells with positive intensity are returned.
    """
    d = _phd_array(D)
    n_hat = round_half_up(expected_cardinality(d))
    order = sorted(range(d.size), key=lambda c: (-d[c], c))
    return frozenset(c for c in order[:n_hat] if d[c] > 0.0)


def cphd_cardinality_estimate(p) -> int:
    """Mode of a cardinality PMF, smallest ``n`` on ties."""
    arr = p.p if isinstance(p, CardinalityPmf) else np.asarray(p, dtype=float)
    return int(np.argmax(arr))


def map_labeled_estimate(post: LabeledPosterior) -> LabeledSet:
    """MAP cardinality, then the most probable set of that cardinality.

    Ties in either step go to the smaller cardinality and then to the
    canonically first set.
    """
    n_hat = cphd_cardinality_estimate(cardinality_pmf(post))
    best, best_w = None, -1.0
    for X, w in post.items():
        if len(X) == n_hat and w > best_w:
            best, best_w = X, w
    return LabeledSet.from_pairs(best or (), post.time)


def marginal_labeled_estimate(post: LabeledPosterior) -> LabeledSet:
    """MAP cardinality, then the labels of highest marginal existence.

    Each chosen label is placed at its most probable cell given existence.
    """
    n_hat = cphd_cardinality_estimate(cardinality_pmf(post))
    exist: dict = defaultdict(list)
    where: dict = defaultdict(lambda: defaultdict(list))
    for X, w in post.items():
        for c, lab in X:
            exist[lab].append(w)
            where[lab][c].append(w)
    ranked = sorted(exist, key=lambda lab: (-math.fsum(exist[lab]), lab.key))
    pairs = []
    for lab in ranked[:n_hat]:
        cells = where[lab]
        c = min(cells, key=lambda c: (-math.fsum(cells[c]), c))
        pairs.append((c, lab))
    return LabeledSet.from_pairs(pairs, post.time)


def extract_trajectories(estimates: Sequence[LabeledSet]) -> list[LTrajectory]:
    """One l-trajectory per label seen in a time-ordered run of estimates.

    Entry ``i`` of each trajectory is the label's state in ``estimates[i]``
    or ``None``.  Trajectories are returned in canonical label order.
    """
    estimates = list(estimates)
    if not estimates:
        return []
    for j, X in enumerate(estimates):
        if not isinstance(X, LabeledSet):
            if not is_labeled(X):
                raise NotLabeledError(f"estimate {j} is not labeled")
            estimates[j] = LabeledSet(X)
    first = estimates[0].time
    for j, X in enumerate(estimates):
        if X.time != first + j:
            raise MalformedInputError(f"estimate {j} has time {X.time}, expected {first + j}")
    labels = sorted({lab for X in estimates for lab in X.labels}, key=lambda lab: lab.key)
    return [
        LTrajectory(lab, tuple(X.state_of(lab) for X in estimates), first_time=first)
        for lab in labels
    ]
