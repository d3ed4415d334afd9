"""Exception hierarchy.

Each class carries the CLI exit code it maps to.
"""


class PinrateError(Exception):
    exit_code = 1


class DomainError(PinrateError, ValueError):
    """A parameter lies outside an operation's domain."""


class NormalizationError(DomainError):
    pass


class DegenerateLawError(DomainError):
    pass


class InsufficientDataError(PinrateError):
    pass


class PrecisionError(PinrateError):
    exit_code = 2


class SingularityError(PinrateError):
    exit_code = 3


class CutLineError(SingularityError, DomainError):
    exit_code = 3


class OnContourError(SingularityError):
    """A zero of 1 - K_b lies on (or numerically at) a sampling circle."""


class MultiplicityError(SingularityError):
    pass


class MismatchError(PinrateError):
    exit_code = 4


class ConvergenceError(PinrateError):
    exit_code = 4
