"""Exception types shared across the toolkit."""


class LrfsError(Exception):
    """Base class for all toolkit errors."""


class MalformedInputError(LrfsError, ValueError):
    """Input violates a structural precondition (mixed times, gaps, empty input)."""


class NotLabeledError(LrfsError, ValueError):
    """A set of labeled states contains a repeated label."""


class EnumerationBoundError(LrfsError, RuntimeError):
    """An exact enumeration would exceed its configured size limit."""


class ConfigurationError(LrfsError, ValueError):
    """Model or scenario configuration is inconsistent."""


class DegenerateUpdateError(LrfsError, ArithmeticError):
    """The measurement set has zero likelihood under the predicted density."""


class InconsistentRestorationError(LrfsError, ValueError):
    """A label assignment puts one label on time-overlapping trajectories."""


class InconsistentSoTError(LrfsError, ValueError):
    """A set of trajectories is not physically consistent."""


class CombinatorialCapError(LrfsError, RuntimeError):
    """A combinatorial count exceeded its cap."""


class IncommensurableError(LrfsError, TypeError):
    """Two densities with different unit exponents were compared.

    Attributes
    ----------
    exponents : tuple of int
        The distinct length exponents involved.
    """

    code = "INCOMMENSURABLE"

    def __init__(self, exponents, message=None):
        self.exponents = tuple(exponents)
        if message is None:
            message = (
                "densities with units "
                + " and ".join(f"iota^-{e}" for e in self.exponents)
                + " cannot be ordered"
            )
        super().__init__(message)
