"""Scenario configuration, simulation, end-to-end runs and the representation audit.

Scenarios are TOML documents::

    seed = 7
    horizon = 8
    estimator = "map"            # or "marginal"

    [grid]
    shape = [12]                 # cells per axis; 1-D or 2-D
    spacing = 1.0

    [motion]
    kernel = "shift"             # "identity" | "shift" | "random_walk"
    offset = [1]                 # shift: cells per step along each axis
    wrap = true                  # shift: wrap around the grid edge
    p_stay = 0.6                 # random_walk: rest is split over neighbours
    p_survival = 1.0

    [sensor]
    p_detection = 1.0
    clutter_rate = 0.0
    likelihood = "identity"      # or "blur" with `accuracy`
    detection_schedule = { 3 = 0.0, 4 = 0.0 }

    [[birth]]
    time = 1
    cells = [0]                  # uniform over these cells
    existence = 1.0

    [metric]
    cutoff = 10.0
    order = 1
    label_penalty = 2.0

Births at time ``k`` get labels ``(k, 1), (k, 2), ...`` in file order.
The measurement alphabet is the set of grid cells.
"""
from __future__ import annotations

import json
import math
import sys
import time as _time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .distributions import LmbParams, cardinality_pmf
from .errors import ConfigurationError
from .exact_filter import (
    EnumerationLimits,
    LabeledPosterior,
    MotionModel,
    SensorModel,
    expected_cardinality,
    extract_trajectories,
    map_labeled_estimate,
    marginal_labeled_estimate,
    phd_from_posterior,
    predict,
    update,
)
from .metrics import AssignmentMetricParams, set_distance
from .state_model import Label, LabeledSet, segments_of, to_record

__all__ = [
    "ConfigSyntaxError",
    "ConfigValidationError",
    "Grid",
    "BirthSpec",
    "ScenarioConfig",
    "parse_config",
    "load_config",
    "canonical_scenario",
    "build_models",
    "Simulation",
    "simulate",
    "StepReport",
    "RunReport",
    "run",
    "AuditCheck",
    "AuditReport",
    "audit",
]

SCENARIO_DIR = Path(__file__).parent / "scenarios"

KERNELS = ("identity", "shift", "random_walk")
LIKELIHOODS = ("identity", "blur")
ESTIMATORS = ("map", "marginal")


class ConfigSyntaxError(ConfigurationError):
    """The scenario text is not valid TOML."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"syntax error{where}: {message}")


class ConfigValidationError(ConfigurationError):
    """The scenario parsed but violates one or more constraints.

    ``violations`` lists every problem as ``"field.path: message"``.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid scenario:\n  " + "\n  ".join(self.violations))


@dataclass(frozen=True)
class Grid:
    """Regular grid of cells, indexed in row-major order."""

    shape: tuple
    spacing: float = 1.0

    @property
    def num_cells(self) -> int:
        return math.prod(self.shape)

    @property
    def dim(self) -> int:
        return len(self.shape)

    def coords(self, cell: int) -> tuple:
        return tuple(float(i) * self.spacing for i in np.unravel_index(int(cell), self.shape))

    def neighbours(self, cell: int) -> list[int]:
        idx = np.unravel_index(int(cell), self.shape)
        out = []
        for axis in range(self.dim):
            for step in (-1, 1):
                j = list(idx)
                j[axis] += step
                if 0 <= j[axis] < self.shape[axis]:
                    out.append(int(np.ravel_multi_index(j, self.shape)))
        return sorted(out)

    def to_coordinates(self, X: LabeledSet) -> LabeledSet:
        return LabeledSet(((self.coords(s.x), s.label, s.time) for s in X), time=X.time)


@dataclass(frozen=True)
class BirthSpec:
    time: int
    cells: tuple
    existence: float


@dataclass(frozen=True)
class ScenarioConfig:
    grid: Grid
    horizon: int
    births: tuple = ()
    kernel: str = "identity"
    offset: tuple = ()
    wrap: bool = True
    p_stay: float = 1.0
    p_survival: float = 1.0
    p_detection: float = 1.0
    clutter_rate: float = 0.0
    likelihood: str = "identity"
    accuracy: float = 1.0
    detection_schedule: tuple = ()
    alphabet: str = "cells"
    seed: int = 0
    estimator: str = "map"
    metric: AssignmentMetricParams = field(default_factory=AssignmentMetricParams)

    def replace(self, **changes) -> "ScenarioConfig":
        from dataclasses import replace

        return replace(self, **changes)

    def birth_labels(self) -> dict:
        """``{time: [(Label, BirthSpec), ...]}`` with labels ``(k, i)``."""
        out: dict = {}
        for b in self.births:
            out.setdefault(b.time, []).append(b)
        return {k: [(Label(k, i + 1), b) for i, b in enumerate(bs)] for k, bs in sorted(out.items())}

    def detection_at(self, k: int) -> float:
        return dict(self.detection_schedule).get(k, self.p_detection)


# -- parsing ----------------------------------------------------------------

_TOP_KEYS = {"seed", "horizon", "estimator", "grid", "motion", "sensor", "birth", "metric"}
_SECTION_KEYS = {
    "grid": {"shape", "spacing"},
    "motion": {"kernel", "offset", "wrap", "p_stay", "p_survival"},
    "sensor": {"p_detection", "clutter_rate", "likelihood", "accuracy", "detection_schedule", "alphabet"},
    "metric": {"cutoff", "order", "label_penalty"},
}
_BIRTH_KEYS = {"time", "cells", "existence"}


class _Checker:
    def __init__(self):
        self.violations: list[str] = []

    def add(self, path, msg):
        self.violations.append(f"{path}: {msg}")

    def number(self, table, key, path, default=None, *, required=False, integer=False):
        if key not in table:
            if required:
                self.add(path, "missing required field")
            return default
        v = table[key]
        kinds = (int,) if integer else (int, float)
        if isinstance(v, bool) or not isinstance(v, kinds):
            self.add(path, f"expected {'an integer' if integer else 'a number'}, got {v!r}")
            return default
        if not integer and not math.isfinite(v):
            self.add(path, f"expected a finite number, got {v!r}")
            return default
        return v

    def probability(self, table, key, path, default):
        v = self.number(table, key, path, default)
        if v is not None and not 0.0 <= v <= 1.0:
            self.add(path, f"probability out of range [0, 1] (got {v})")
            return default
        return float(v) if v is not None else v

    def choice(self, table, key, path, options, default):
        v = table.get(key, default)
        if v not in options:
            self.add(path, f"expected one of {list(options)}, got {v!r}")
            return default
        return v


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate scenario text.

    Raises
    ------
    ConfigSyntaxError
        With line and column, when the text is not valid TOML.
    ConfigValidationError
        Listing every semantic violation found.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        msg = str(exc).split(" (at line")[0]
        raise ConfigSyntaxError(msg, getattr(exc, "lineno", None), getattr(exc, "colno", None)) from None
    return _validate(doc)


def load_config(path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


def canonical_scenario(name: str = "oracle") -> ScenarioConfig:
    """One of the scenarios shipped with the package (``oracle``, ``dropout``, ``cluttered``)."""
    return load_config(SCENARIO_DIR / f"{name}.toml")


def _validate(doc: dict[str, Any]) -> ScenarioConfig:
    ck = _Checker()
    for key in sorted(set(doc) - _TOP_KEYS):
        ck.add(key, "unknown field")
    sections = {}
    for name, allowed in _SECTION_KEYS.items():
        table = doc.get(name, {})
        if not isinstance(table, dict):
            ck.add(name, "expected a table")
            table = {}
        for key in sorted(set(table) - allowed):
            ck.add(f"{name}.{key}", "unknown field")
        sections[name] = table
    g, m, s, mt = sections["grid"], sections["motion"], sections["sensor"], sections["metric"]

    shape = None
    if "shape" not in g:
        ck.add("grid.shape", "missing required field")
    else:
        raw = g["shape"]
        raw = [raw] if isinstance(raw, int) and not isinstance(raw, bool) else raw
        if (not isinstance(raw, list) or not 1 <= len(raw) <= 2
                or not all(isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in raw)):
            ck.add("grid.shape", f"expected 1 or 2 positive integers, got {g['shape']!r}")
        else:
            shape = tuple(raw)
    spacing = ck.number(g, "spacing", "grid.spacing", 1.0)
    if spacing is not None and not spacing > 0:
        ck.add("grid.spacing", f"must be > 0 (got {spacing})")
    grid = Grid(shape, float(spacing)) if shape else None
    ncells = grid.num_cells if grid else None

    horizon = ck.number(doc, "horizon", "horizon", None, required=True, integer=True)
    if horizon is not None and horizon < 1:
        ck.add("horizon", f"must be >= 1 (got {horizon})")
    seed = ck.number(doc, "seed", "seed", 0, integer=True)
    estimator = ck.choice(doc, "estimator", "estimator", ESTIMATORS, "map")

    kernel = ck.choice(m, "kernel", "motion.kernel", KERNELS, "identity")
    offset = m.get("offset", [0] * (len(shape) if shape else 1))
    if isinstance(offset, int) and not isinstance(offset, bool):
        offset = [offset]
    if not isinstance(offset, list) or not all(isinstance(o, int) and not isinstance(o, bool) for o in offset):
        ck.add("motion.offset", f"expected a list of integers, got {offset!r}")
        offset = []
    elif shape and len(offset) != len(shape):
        ck.add("motion.offset", f"needs {len(shape)} entries, got {len(offset)}")
    wrap = m.get("wrap", True)
    if not isinstance(wrap, bool):
        ck.add("motion.wrap", f"expected true or false, got {wrap!r}")
        wrap = True
    p_stay = ck.probability(m, "p_stay", "motion.p_stay", 0.5 if kernel == "random_walk" else 1.0)
    p_survival = ck.probability(m, "p_survival", "motion.p_survival", 1.0)

    p_detection = ck.probability(s, "p_detection", "sensor.p_detection", 1.0)
    clutter = ck.number(s, "clutter_rate", "sensor.clutter_rate", 0.0)
    if clutter is not None and clutter < 0:
        ck.add("sensor.clutter_rate", f"must be >= 0 (got {clutter})")
    likelihood = ck.choice(s, "likelihood", "sensor.likelihood", LIKELIHOODS, "identity")
    accuracy = ck.probability(s, "accuracy", "sensor.accuracy", 1.0)
    alphabet = ck.choice(s, "alphabet", "sensor.alphabet", ("cells",), "cells")
    schedule = []
    sched = s.get("detection_schedule", {})
    if not isinstance(sched, dict):
        ck.add("sensor.detection_schedule", "expected a table of time = probability")
        sched = {}
    for key, val in sched.items():
        path = f"sensor.detection_schedule.{key}"
        try:
            k = int(key)
        except ValueError:
            ck.add(path, "time keys must be integers")
            continue
        if horizon is not None and not 1 <= k <= horizon:
            ck.add(path, f"time outside 1..{horizon}")
        p = ck.probability(sched, key, path, None)
        if p is not None:
            schedule.append((k, p))

    births = []
    raw_births = doc.get("birth", [])
    if not isinstance(raw_births, list):
        ck.add("birth", "expected an array of tables ([[birth]])")
        raw_births = []
    for j, b in enumerate(raw_births):
        path = f"birth[{j}]"
        if not isinstance(b, dict):
            ck.add(path, "expected a table")
            continue
        for key in sorted(set(b) - _BIRTH_KEYS):
            ck.add(f"{path}.{key}", "unknown field")
        t = ck.number(b, "time", f"{path}.time", None, required=True, integer=True)
        if t is not None and horizon is not None and not 1 <= t <= horizon:
            ck.add(f"{path}.time", f"must lie in 1..{horizon} (got {t})")
        q = ck.probability(b, "existence", f"{path}.existence", 1.0)
        cells = b.get("cells")
        if cells is None:
            ck.add(f"{path}.cells", "missing required field")
        elif (not isinstance(cells, list) or not cells
              or not all(isinstance(c, int) and not isinstance(c, bool) for c in cells)):
            ck.add(f"{path}.cells", f"expected a nonempty list of cell indices, got {cells!r}")
            cells = None
        elif ncells is not None and not all(0 <= c < ncells for c in cells):
            ck.add(f"{path}.cells", f"cell index outside 0..{ncells - 1}")
        elif len(set(cells)) != len(cells):
            ck.add(f"{path}.cells", "repeated cell index")
        if t is not None and cells:
            births.append(BirthSpec(int(t), tuple(cells), q))

    cutoff = ck.number(mt, "cutoff", "metric.cutoff", 10.0)
    order = ck.number(mt, "order", "metric.order", 1.0)
    penalty = ck.number(mt, "label_penalty", "metric.label_penalty", 2.0)
    metric = None
    try:
        metric = AssignmentMetricParams(float(cutoff), float(order), float(penalty))
    except ValueError as exc:
        ck.add("metric", str(exc))

    limits = EnumerationLimits()
    if ncells is not None and ncells > limits.max_cells:
        ck.add("grid.shape", f"{ncells} cells exceed the exact-filter limit of {limits.max_cells}")
    if horizon is not None and horizon > limits.max_steps:
        ck.add("horizon", f"{horizon} steps exceed the exact-filter limit of {limits.max_steps}")
    if len(births) > limits.max_labels:
        ck.add("birth", f"{len(births)} labels exceed the exact-filter limit of {limits.max_labels}")

    if ck.violations:
        raise ConfigValidationError(ck.violations)
    return ScenarioConfig(
        grid=grid,
        horizon=horizon,
        births=tuple(births),
        kernel=kernel,
        offset=tuple(offset),
        wrap=wrap,
        p_stay=p_stay,
        p_survival=p_survival,
        p_detection=p_detection,
        clutter_rate=float(clutter),
        likelihood=likelihood,
        accuracy=accuracy,
        detection_schedule=tuple(sorted(schedule)),
        alphabet=alphabet,
        seed=seed,
        estimator=estimator,
        metric=metric,
    )


# -- model construction -----------------------------------------------------

def _transition(config: ScenarioConfig) -> np.ndarray:
    grid = config.grid
    n = grid.num_cells
    T = np.zeros((n, n))
    for c in range(n):
        if config.kernel == "identity":
            T[c, c] = 1.0
        elif config.kernel == "shift":
            idx = np.array(np.unravel_index(c, grid.shape)) + np.array(config.offset)
            if config.wrap:
                idx = idx % np.array(grid.shape)
            else:
                idx = np.clip(idx, 0, np.array(grid.shape) - 1)
            T[c, int(np.ravel_multi_index(tuple(idx), grid.shape))] = 1.0
        else:
            nb = grid.neighbours(c)
            if not nb:
                T[c, c] = 1.0
                continue
            T[c, c] = config.p_stay
            for j in nb:
                T[c, j] += (1.0 - config.p_stay) / len(nb)
    return T


def _likelihood(config: ScenarioConfig) -> np.ndarray:
    grid = config.grid
    n = grid.num_cells
    L = np.zeros((n, n))
    for c in range(n):
        nb = grid.neighbours(c)
        if config.likelihood == "identity" or not nb:
            L[c, c] = 1.0
        else:
            L[c, c] = config.accuracy
            for j in nb:
                L[c, j] += (1.0 - config.accuracy) / len(nb)
    return L


def build_models(config: ScenarioConfig) -> tuple[MotionModel, dict, SensorModel]:
    """Motion model, per-step sensor overrides, and the base sensor model."""
    n = config.grid.num_cells
    births = {}
    for k, entries in config.birth_labels().items():
        q, s = {}, {}
        for lab, b in entries:
            pmf = np.zeros(n)
            pmf[list(b.cells)] = 1.0 / len(b.cells)
            q[lab], s[lab] = b.existence, pmf
        births[k] = LmbParams(q, s)
    motion = MotionModel(_transition(config), config.p_survival, births)
    sensor = SensorModel(config.p_detection, _likelihood(config), config.clutter_rate)
    per_step = {k: sensor.with_detection(p) for k, p in config.detection_schedule}
    return motion, per_step, sensor


# -- simulation -------------------------------------------------------------

@dataclass(frozen=True)
class Simulation:
    """Ground truth ``truth[k-1]`` and measurements ``measurements[k-1]`` for ``k = 1..horizon``."""

    truth: tuple
    measurements: tuple


def simulate(config: ScenarioConfig, seed: int | None = None) -> Simulation:
    """Draw ground truth and measurement lists from the scenario's generative model."""
    rng = np.random.default_rng(config.seed if seed is None else seed)
    motion, per_step, sensor = build_models(config)
    T, L = motion.transition, sensor.likelihood
    M = sensor.alphabet_size
    births = config.birth_labels()
    current: list = []  # (cell, label) in canonical label order
    truth, meas = [], []
    for k in range(1, config.horizon + 1):
        nxt = []
        for c, lab in current:
            if rng.random() < motion.p_survival:
                nxt.append((int(rng.choice(T.shape[0], p=T[c])), lab))
        for lab, b in births.get(k, []):
            if rng.random() < b.existence:
                nxt.append((int(b.cells[rng.integers(len(b.cells))]), lab))
        current = sorted(nxt, key=lambda e: e[1].key)
        truth.append(LabeledSet.from_pairs(current, k))

        sk = per_step.get(k, sensor)
        Z = []
        for c, _ in current:
            if rng.random() < sk.p_detection:
                Z.append(int(rng.choice(M, p=L[c])))
        n_clutter = int(rng.poisson(sk.clutter_rate))
        Z.extend(int(z) for z in rng.integers(0, M, size=n_clutter))
        meas.append(tuple(sorted(Z)))
    return Simulation(tuple(truth), tuple(meas))


# -- end-to-end run ---------------------------------------------------------

@dataclass
class StepReport:
    time: int
    truth: LabeledSet
    measurements: tuple
    estimate: LabeledSet
    distance: float
    support_size: int
    cardinality: tuple
    expected_cardinality: float
    elapsed: float = 0.0


@dataclass
class RunReport:
    """Per-step results plus extracted trajectories.

    ``elapsed`` timings are kept on the objects but left out of
    :meth:`records` so that reports are reproducible byte for byte.
    """

    config: ScenarioConfig
    steps: list
    trajectories: list
    truth_trajectories: list
    posteriors: list = field(default_factory=list)

    @property
    def segments(self) -> list:
        return [seg for traj in self.trajectories for seg in segments_of(traj)]

    @property
    def truth_segments(self) -> list:
        return [seg for traj in self.truth_trajectories for seg in segments_of(traj)]

    def records(self) -> list[dict]:
        out = []
        for s in self.steps:
            out.append({"kind": "measurements", "step": s.time, "z": list(s.measurements)})
            out.append({"kind": "truth", "step": s.time, "set": to_record(s.truth)})
            out.append({"kind": "estimate", "step": s.time, "set": to_record(s.estimate)})
            out.append({
                "kind": "posterior",
                "step": s.time,
                "support_size": s.support_size,
                "cardinality_pmf": list(s.cardinality),
                "expected_cardinality": s.expected_cardinality,
            })
            out.append({"kind": "distance", "step": s.time, "value": s.distance})
        last = self.steps[-1].time if self.steps else 0
        out.append({"kind": "track_segments", "step": last, "segments": [to_record(g) for g in self.segments]})
        return out

    def to_records(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records())

    def to_text(self) -> str:
        lines = [f"{'step':>4}  {'|Z|':>3}  {'truth':<28} {'estimate':<28} {'N':>6} {'dist':>7}"]
        for s in self.steps:
            lines.append(
                f"{s.time:>4}  {len(s.measurements):>3}  {_fmt_set(s.truth):<28} {_fmt_set(s.estimate):<28}"
                f" {s.expected_cardinality:>6.3f} {s.distance:>7.3f}"
            )
        lines.append("track segments:")
        for seg in self.segments:
            lines.append(f"  {seg.label}  start={seg.start_time}  cells={list(seg.states)}")
        return "\n".join(lines) + "\n"


def _fmt_set(X: LabeledSet) -> str:
    return "{" + ", ".join(f"{s.label}@{s.x}" for s in X) + "}"


def run(config: ScenarioConfig, seed: int | None = None, keep_posteriors: bool = False) -> RunReport:
    """Simulate, filter, estimate, extract trajectories and score every step."""
    seed = config.seed if seed is None else seed
    sim = simulate(config, seed)
    motion, per_step, sensor = build_models(config)
    estimator = map_labeled_estimate if config.estimator == "map" else marginal_labeled_estimate
    post = LabeledPosterior.empty(config.grid.num_cells)
    steps, posteriors, estimates = [], [], []
    for k in range(1, config.horizon + 1):
        t0 = _time.perf_counter()
        post = predict(post, motion)
        post = update(post, sim.measurements[k - 1], per_step.get(k, sensor))
        est = estimator(post)
        pmf = cardinality_pmf(post)
        truth = sim.truth[k - 1]
        dist = set_distance(config.grid.to_coordinates(est), config.grid.to_coordinates(truth), config.metric)
        steps.append(StepReport(
            time=k,
            truth=truth,
            measurements=sim.measurements[k - 1],
            estimate=est,
            distance=dist,
            support_size=len(post),
            cardinality=tuple(float(v) for v in pmf.p),
            expected_cardinality=expected_cardinality(phd_from_posterior(post)),
            elapsed=_time.perf_counter() - t0,
        ))
        estimates.append(est)
        if keep_posteriors:
            posteriors.append(post)
    return RunReport(
        config,
        steps,
        extract_trajectories(estimates),
        extract_trajectories(sim.truth),
        posteriors,
    )


# -- representation audit ---------------------------------------------------

@dataclass(frozen=True)
class AuditCheck:
    code: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class AuditReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, code: str) -> AuditCheck:
        for c in self.checks:
            if c.code == code:
                return c
        raise KeyError(code)

    def to_text(self) -> str:
        return "".join(f"{'PASS' if c.passed else 'FAIL'}  {c.code:<14} {c.detail}\n" for c in self.checks)

    def to_records(self) -> str:
        return "".join(
            json.dumps({"kind": "audit", "code": c.code, "passed": c.passed, "detail": c.detail}, sort_keys=True) + "\n"
            for c in self.checks
        )


def _check(code, fn) -> AuditCheck:
    try:
        ok, detail = fn()
    except Exception as exc:  # an audit reports, it does not crash
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    return AuditCheck(code, bool(ok), detail)


def audit() -> AuditReport:
    """Run every counterexample fixture and the nonexistence and unit checks."""
    from . import fixtures

    return AuditReport(tuple(_check(code, fn) for code, fn in fixtures.AUDIT_CHECKS))

