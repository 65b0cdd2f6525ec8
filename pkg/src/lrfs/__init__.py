"""Labeled random finite sets on a finite grid.

Exact LMB densities and an exact labeled Bayes filter, the unlabeled
trajectory representation with its consistency audit, a trajectory-PHD
laboratory with unit-aware comparisons, and a label-aware set distance.
"""
from .errors import (
    CombinatorialCapError,
    ConfigurationError,
    DegenerateUpdateError,
    EnumerationBoundError,
    IncommensurableError,
    InconsistentRestorationError,
    InconsistentSoTError,
    LrfsError,
    MalformedInputError,
    NotLabeledError,
)
from .state_model import Label, LabeledSet, LabeledState, LTrajectory, TrackSegment, is_labeled

__version__ = "0.1.0"

__all__ = [
    "Label",
    "LabeledSet",
    "LabeledState",
    "LTrajectory",
    "TrackSegment",
    "is_labeled",
    "LrfsError",
    "MalformedInputError",
    "NotLabeledError",
    "EnumerationBoundError",
    "ConfigurationError",
    "DegenerateUpdateError",
    "InconsistentRestorationError",
    "InconsistentSoTError",
    "CombinatorialCapError",
    "IncommensurableError",
]
