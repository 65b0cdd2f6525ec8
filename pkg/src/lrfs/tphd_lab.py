"""Trajectory-domain intensities and why their peaks cannot be ranked.

A trajectory ``(k', x^{1:i})`` lives in an ``i``-fold product of the state
space, so an intensity evaluated on it carries unit ``iota^-i``.  Values of
different ``i`` are kept apart by :class:`UnitTaggedValue`, and any attempt
to order them raises :class:`~lrfs.errors.IncommensurableError`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EnumerationBoundError, IncommensurableError, MalformedInputError
from .exact_filter import round_half_up
from .state_model import kinematic_state
from .trajectory_repr import Trajectory, sot

__all__ = [
    "MIXED_LENGTH",
    "INCOMMENSURABLE",
    "POISSON_SOT_NONZERO",
    "UnitTaggedValue",
    "compare_densities",
    "TrajectoryIntensity",
    "trajectory_domain",
    "trajectory_integral",
    "GmTphdComponent",
    "MixedLengthReport",
    "gm_tphd_build",
    "gm_tphd_estimate",
    "PoissonSotModel",
    "poisson_sot_density",
    "uniform_intensity",
]

MIXED_LENGTH = "MIXED-LENGTH"
INCOMMENSURABLE = IncommensurableError.code
POISSON_SOT_NONZERO = "POISSON-SOT-NONZERO"

DEFAULT_DOMAIN_CAP = 5_000_000
PD_TOL = 1e-12


@dataclass(frozen=True)
class UnitTaggedValue:
    """A density value in units of ``iota ** -length_exponent``."""

    value: float
    length_exponent: int

    def __post_init__(self):
        if not isinstance(self.length_exponent, (int, np.integer)) or self.length_exponent < 1:
            raise MalformedInputError(f"length exponent must be a positive integer, got {self.length_exponent!r}")
        v = float(self.value)
        if not (v >= 0.0 and math.isfinite(v)):
            raise MalformedInputError(f"density value must be finite and >= 0, got {v}")
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "length_exponent", int(self.length_exponent))

    def _check(self, other: "UnitTaggedValue"):
        if self.length_exponent != other.length_exponent:
            raise IncommensurableError((self.length_exponent, other.length_exponent))

    def __lt__(self, other):
        self._check(other)
        return self.value < other.value

    def __le__(self, other):
        self._check(other)
        return self.value <= other.value

    def __gt__(self, other):
        self._check(other)
        return self.value > other.value

    def __ge__(self, other):
        self._check(other)
        return self.value >= other.value


def compare_densities(a: UnitTaggedValue, b: UnitTaggedValue) -> int:
    """Return -1, 0 or 1 as ``a`` is below, equal to or above ``b``.

    Raises
    ------
    IncommensurableError
        If the two values have different length exponents.
    """
    a._check(b)
    return (a.value > b.value) - (a.value < b.value)


def trajectory_domain(horizon: int) -> list[tuple[int, int]]:
    """All ``(start, length)`` classes with ``0 <= start <= horizon`` and ``1 <= length <= horizon - start + 1``."""
    return [(k0, i) for k0 in range(horizon + 1) for i in range(1, horizon - k0 + 2)]


@dataclass(frozen=True, eq=False)
class TrajectoryIntensity:
    """Intensity over discretized trajectories up to ``horizon``.

    Parameters
    ----------
    horizon : int
        Current time index ``k``; start times run over ``0..k``.
    points : (G, D) array_like
        Coordinates of the grid cells a single state may occupy.
    classes : mapping (start, length) -> ndarray
        Array of shape ``(G,) * length`` holding intensity values (per unit
        trajectory volume) on each discretized trajectory.  Missing classes
        are zero.
    cell_volume : float
        Volume of one grid cell in state units; a length-``i`` trajectory
        cell has volume ``cell_volume ** i``.
    """

    horizon: int
    points: np.ndarray
    classes: Mapping = field(default_factory=dict)
    cell_volume: float = 1.0
    k_max: int | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.k_max is not None and self.horizon > self.k_max:
            raise MalformedInputError(f"horizon {self.horizon} beyond k_max {self.k_max}")
        g = pts.shape[0]
        valid = set(trajectory_domain(self.horizon))
        classes = {}
        for (k0, i), arr in self.classes.items():
            if (k0, i) not in valid:
                raise MalformedInputError(f"class (start={k0}, length={i}) outside the horizon-{self.horizon} domain")
            arr = np.asarray(arr, dtype=float)
            if arr.shape != (g,) * i:
                raise MalformedInputError(f"class ({k0}, {i}) has shape {arr.shape}, expected {(g,) * i}")
            if np.any(arr < 0) or not np.all(np.isfinite(arr)):
                raise MalformedInputError(f"class ({k0}, {i}) has negative or non-finite values")
            arr.setflags(write=False)
            classes[(int(k0), int(i))] = arr
        object.__setattr__(self, "classes", dict(sorted(classes.items())))
        object.__setattr__(self, "_index", {tuple(p): c for c, p in enumerate(pts.tolist())})

    @property
    def num_cells(self) -> int:
        return self.points.shape[0]

    def cell_of(self, x) -> int:
        x = kinematic_state(x)
        if isinstance(x, int):
            if x >= self.num_cells:
                raise MalformedInputError(f"cell {x} outside a {self.num_cells}-cell grid")
            return x
        try:
            return self._index[x]
        except KeyError:
            raise MalformedInputError(f"state {x} is not a grid point") from None

    def __call__(self, T: Trajectory) -> UnitTaggedValue:
        """Intensity at a trajectory, tagged with its unit exponent."""
        if not (0 <= T.start_time <= self.horizon and T.length <= self.horizon - T.start_time + 1):
            raise MalformedInputError(f"trajectory {T} outside the horizon-{self.horizon} domain")
        cells = tuple(self.cell_of(x) for x in T.states)
        arr = self.classes.get((T.start_time, T.length))
        return UnitTaggedValue(0.0 if arr is None else float(arr[cells]), T.length)

    def size(self) -> int:
        return sum(self.num_cells ** i for _, i in trajectory_domain(self.horizon))


def trajectory_integral(D: TrajectoryIntensity, domain_cap: int = DEFAULT_DOMAIN_CAP) -> float:
    """``sum_{k'} sum_i sum_{x^{1:i}} D(k', x^{1:i}) dx^{1:i}``: expected trajectory count."""
    stored = sum(arr.size for arr in D.classes.values())
    if stored > domain_cap:
        raise EnumerationBoundError(f"{stored} trajectory cells exceed the cap {domain_cap}")
    return math.fsum(
        math.fsum(np.ravel(arr).tolist()) * D.cell_volume ** i for (_, i), arr in D.classes.items()
    )


@dataclass(frozen=True, eq=False)
class GmTphdComponent:
    """Weighted Gaussian over trajectories of one start time and length.

    ``anchor`` has shape ``(length, D)``; ``covariance`` is the
    ``(length*D, length*D)`` covariance of the stacked states.
    """

    weight: float
    start_time: int
    anchor: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        w = float(self.weight)
        if not (w >= 0.0 and math.isfinite(w)):
            raise MalformedInputError(f"component weight must be >= 0, got {w}")
        anchor = np.asarray(self.anchor, dtype=float)
        if anchor.ndim == 1:
            anchor = anchor[:, None]
        if anchor.ndim != 2 or anchor.shape[0] < 1:
            raise MalformedInputError("anchor must have shape (length, dim)")
        n = anchor.size
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if cov.shape != (n, n):
            raise MalformedInputError(f"covariance shape {cov.shape}, expected {(n, n)}")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=PD_TOL):
            raise MalformedInputError("covariance is not symmetric")
        if np.linalg.eigvalsh(cov).min() <= PD_TOL:
            raise MalformedInputError("covariance is not positive definite")
        anchor.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "covariance", cov)

    @property
    def length(self) -> int:
        return self.anchor.shape[0]

    @property
    def dim(self) -> int:
        return self.anchor.shape[1]

    def anchor_trajectory(self) -> Trajectory:
        return Trajectory(self.start_time, tuple(tuple(row) for row in self.anchor.tolist()))


@dataclass(frozen=True)
class MixedLengthReport:
    """Why a Gaussian mixture over trajectories is not a single density."""

    length_classes: Mapping  # length -> tuple of component indices
    code: str = MIXED_LENGTH

    def __str__(self):
        parts = ", ".join(f"length {i}: components {list(idx)}" for i, idx in self.length_classes.items())
        return f"{self.code}: mixture mixes units {', '.join(f'iota^-{i}' for i in self.length_classes)} ({parts})"


def _length_classes(components: Sequence[GmTphdComponent]) -> dict:
    out: dict = {}
    for j, comp in enumerate(components):
        out.setdefault(comp.length, []).append(j)
    return {i: tuple(v) for i, v in sorted(out.items())}


def _gaussian_on_grid(comp: GmTphdComponent, pts: np.ndarray) -> np.ndarray:
    """Gaussian density of ``comp`` at every grid trajectory, shape ``(G,) * length``."""
    g, d = pts.shape
    i = comp.length
    grids = np.meshgrid(*([np.arange(g)] * i), indexing="ij")
    stacked = np.concatenate([pts[idx.ravel()] for idx in grids], axis=1)  # (G^i, i*d)
    diff = stacked - comp.anchor.reshape(1, -1)
    chol = np.linalg.cholesky(comp.covariance)
    sol = np.linalg.solve(chol, diff.T)
    maha = np.sum(sol**2, axis=0)
    log_norm = -0.5 * (i * d) * math.log(2 * math.pi) - np.sum(np.log(np.diag(chol)))
    return np.exp(log_norm - 0.5 * maha).reshape((g,) * i)


def gm_tphd_build(
    components: Sequence[GmTphdComponent],
    points,
    *,
    n_bar: float = 1.0,
    cell_volume: float | None = None,
    horizon: int | None = None,
    domain_cap: int = DEFAULT_DOMAIN_CAP,
) -> TrajectoryIntensity | MixedLengthReport:
    """Discretize ``n_bar * sum_j w_j N(x^{1:i}; anchor_j, P_j)`` on a grid.

    Components are evaluated at cell midpoints ``points``.  If the
    components do not all share one trajectory length the mixture has no
    common unit, and a :class:`MixedLengthReport` is returned instead.
    """
    components = list(components)
    if not components:
        raise MalformedInputError("at least one component is required")
    for j, comp in enumerate(components):
        if not comp.weight > 0.0:
            raise MalformedInputError(f"component {j} has non-positive weight {comp.weight}")
    classes = _length_classes(components)
    if len(classes) > 1:
        return MixedLengthReport(classes)
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    dims = {comp.dim for comp in components}
    if dims != {pts.shape[1]}:
        raise MalformedInputError(f"component dimensions {sorted(dims)} do not match grid dimension {pts.shape[1]}")
    if cell_volume is None:
        cell_volume = _spacing(pts) ** pts.shape[1]
    (length,) = classes
    if pts.shape[0] ** length * len({c.start_time for c in components}) > domain_cap:
        raise EnumerationBoundError("discretized trajectory domain exceeds the cap")
    if horizon is None:
        horizon = max(c.start_time + length - 1 for c in components)
    out: dict = {}
    for comp in components:
        key = (comp.start_time, length)
        out[key] = out.get(key, 0.0) + n_bar * comp.weight * _gaussian_on_grid(comp, pts)
    return TrajectoryIntensity(horizon, pts, out, cell_volume)


def _spacing(pts: np.ndarray) -> float:
    axis = np.unique(pts[:, 0])
    if axis.size < 2:
        raise MalformedInputError("cannot infer cell volume from a single-point axis")
    steps = np.diff(axis)
    if not np.allclose(steps, steps[0]):
        raise MalformedInputError("grid axis is not uniformly spaced; pass cell_volume")
    return float(steps[0])


def gm_tphd_estimate(components: Sequence[GmTphdComponent], n_bar: float) -> frozenset:
    """Anchors of the ``round(n_bar)`` highest-weight components.

    Only meaningful when every component has the same length: weights of
    different lengths multiply densities of different units.

    Raises
    ------
    IncommensurableError
        If the components span more than one trajectory length.
    """
    components = list(components)
    for j, comp in enumerate(components):
        if not comp.weight > 0.0:
            raise MalformedInputError(f"component {j} has non-positive weight {comp.weight}")
    classes = _length_classes(components)
    if len(classes) > 1:
        raise IncommensurableError(tuple(classes))
    n_hat = round_half_up(n_bar)
    ranked = sorted(components, key=lambda c: (-c.weight, c.anchor_trajectory().key))
    return frozenset(c.anchor_trajectory() for c in ranked[:n_hat])


@dataclass(frozen=True)
class PoissonSotModel:
    """Poisson process on trajectories with intensity ``intensity``."""

    intensity: TrajectoryIntensity
    total_mass: float = field(init=False)

    def __post_init__(self):
        mass = trajectory_integral(self.intensity)
        if not math.isfinite(mass):
            raise MalformedInputError("intensity has infinite mass")
        object.__setattr__(self, "total_mass", mass)


def poisson_sot_density(model: PoissonSotModel, T: Iterable) -> float:
    """``exp(-integral D) * prod_{T in SoT} D(T)``.

    Nothing here checks physical consistency, which is exactly why this
    family assigns positive density to impossible SoTs.
    """
    value = math.exp(-model.total_mass)
    for traj in sorted(sot(T), key=lambda t: t.key):
        value *= model.intensity(traj).value
    return value


def uniform_intensity(horizon: int, points, value: float, cell_volume: float = 1.0) -> TrajectoryIntensity:
    """Constant intensity on every trajectory class up to ``horizon``."""
    pts = np.asarray(points, dtype=float)
    g = pts.shape[0]
    classes = {(k0, i): np.full((g,) * i, float(value)) for k0, i in trajectory_domain(horizon)}
    return TrajectoryIntensity(horizon, pts, classes, cell_volume)

