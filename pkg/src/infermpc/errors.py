"""Exception hierarchy shared by the library and the CLI."""


class InferMPCError(Exception):
    """Base class for every error raised by infermpc."""


class ShapeError(InferMPCError, ValueError):
    """An array argument has the wrong dimensions."""


class ParameterError(InferMPCError, ValueError):
    """A scalar parameter is outside its admissible range."""


class NumericalDomainError(InferMPCError, ArithmeticError):
    """A computation produced a non-finite value.

    ``step`` holds the offending time index when one is known.
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class SolverFailure(InferMPCError, RuntimeError):
    """No sample in a batch produced a finite trajectory cost."""

    def __init__(self, message: str, partial_log=None):
        super().__init__(message)
        self.partial_log = partial_log


class ConfigError(InferMPCError, ValueError):
    """Invalid experiment configuration or grid set-up."""


class DegenerateDensityError(InferMPCError, ArithmeticError):
    """A grid density collapsed onto too few points to integrate."""
