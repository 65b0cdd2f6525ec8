"""Small hand-built SoTs and labeled sets used by the audit and the demos.

States are one-dimensional points ``(x,)`` so that every equality is exact.
"""
from __future__ import annotations

import numpy as np

from .distributions import IntensityFunction, labeled_poisson_density
from .errors import IncommensurableError
from .state_model import Label, TrackSegment, is_labeled
from .tphd_lab import (
    GmTphdComponent,
    MixedLengthReport,
    PoissonSotModel,
    UnitTaggedValue,
    compare_densities,
    gm_tphd_build,
    gm_tphd_estimate,
    poisson_sot_density,
    uniform_intensity,
)
from .trajectory_repr import (
    SPLIT,
    DUPLICATE,
    Trajectory,
    count_interpretations,
    is_physically_consistent,
    physical_support,
    restore_labels,
    strip_labels,
)

K = 0
X, X1, X2 = (0.0,), (1.0,), (2.0,)

# one target, two labels, identical kinematics
L_SHARED = frozenset({TrackSegment(Label(K, 1), K, (X,)), TrackSegment(Label(K, 2), K, (X,))})

# one physical trajectory, written whole and as three time slices
T0 = frozenset({Trajectory(K, (X, X1, X2))})
T1 = frozenset({Trajectory(K, (X,)), Trajectory(K + 1, (X1,)), Trajectory(K + 2, (X2,))})
T01 = T0 | T1

# one state at time K with two futures
T2 = frozenset({Trajectory(K, (X, X1)), Trajectory(K, (X, X2))})

# two five-step tracks separated by a five-step gap
T3_FIRST = Trajectory(0, tuple((float(j),) for j in range(5)))
T3_SECOND = Trajectory(10, tuple((float(j),) for j in range(10, 15)))
T3 = frozenset({T3_FIRST, T3_SECOND})

# a cell set that repeats a label, so it is not labeled
NON_LABELED = frozenset({(0, Label(K, 1)), (1, Label(K, 1))})

POISSON_SOT_POINTS = np.array([[0.0], [1.0], [2.0]])
POISSON_SOT_VALUE = 0.075
POISSON_SOT_HORIZON = K + 2


def ce1():
    T = strip_labels(L_SHARED)
    return len(T) == 1 and len(L_SHARED) == 2, f"|L| = {len(L_SHARED)}, |strip_labels(L)| = {len(T)}"


def ce2():
    same = physical_support(T0) == physical_support(T1)
    return same and T0 != T1, f"T0 != T1: {T0 != T1}; equal physical support: {same}"


def ce3():
    check = is_physically_consistent(T2)
    first, second = sorted(T2, key=lambda t: t.key)
    restored = restore_labels(T2, {first: Label(K, 1), second: Label(K, 2)})
    ok = (not check) and SPLIT in check.codes and len(restored) == 2
    return ok, f"consistent: {bool(check)}; codes: {list(check.codes)}; restored segments: {len(restored)}"


def ce4():
    n = count_interpretations(T3)
    return n == 2, f"interpretation count {n}"


def poisson_lrfs():
    D = IntensityFunction({(0, Label(K, 1)): 0.5, (1, Label(K, 1)): 0.5})
    value = labeled_poisson_density(D, NON_LABELED)
    labeled = is_labeled((c, lab) for c, lab in NON_LABELED)
    return value > 1e-12 and not labeled, f"density {value:.6g} on a set with a repeated label"


def poisson_sot_model() -> PoissonSotModel:
    return PoissonSotModel(uniform_intensity(POISSON_SOT_HORIZON, POISSON_SOT_POINTS, POISSON_SOT_VALUE))


def poisson_sot():
    value = poisson_sot_density(poisson_sot_model(), T01)
    check = is_physically_consistent(T01)
    ok = value > 1e-12 and not check and DUPLICATE in check.codes
    return ok, f"density {value:.6g} on T01; consistent: {bool(check)}; codes: {list(check.codes)}"


def _mixed_components():
    a = GmTphdComponent(0.5, 1, [[0.0], [1.0]], np.eye(2))
    b = GmTphdComponent(0.9, 0, [[0.0], [1.0], [2.0]], np.eye(3))
    return [a, b]


def mixed_length():
    report = gm_tphd_build(_mixed_components(), np.linspace(-2, 3, 11))
    ok = isinstance(report, MixedLengthReport) and set(report.length_classes) == {2, 3}
    return ok, str(report)


def incommensurable():
    raised = 0
    for attempt in (
        lambda: compare_densities(UnitTaggedValue(0.5, 2), UnitTaggedValue(0.9, 3)),
        lambda: gm_tphd_estimate(_mixed_components(), 1.0),
    ):
        try:
            attempt()
        except IncommensurableError:
            raised += 1
    same = compare_densities(UnitTaggedValue(0.5, 2), UnitTaggedValue(0.9, 2))
    return raised == 2 and same == -1, f"{raised}/2 mixed-unit comparisons refused; same-unit comparison {same}"


AUDIT_CHECKS = (
    ("CE1", ce1),
    ("CE2", ce2),
    ("CE3", ce3),
    ("CE4", ce4),
    ("POISSON-LRFS", poisson_lrfs),
    ("POISSON-SOT", poisson_sot),
    ("MIXED-LENGTH", mixed_length),
    ("INCOMMENSURABLE", incommensurable),
)
