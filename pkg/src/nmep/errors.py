"""Exception hierarchy shared by all modules.

The CLI maps `InvalidInputError` subclasses to exit code 1 and
`NumericalFailure` subclasses to exit code 2.
"""


class InvalidInputError(ValueError):
    """Bad user input: parameters, grids, flags."""


class InvalidConfigError(InvalidInputError):
    pass


class DomainError(InvalidInputError):
    """Argument outside the domain of a special function."""


class PoleError(InvalidInputError):
    """Evaluation exactly at a reservoir frequency."""


class OutOfEnvelopeError(InvalidInputError):
    """Parameters outside the validated range of an oracle."""


class FormatError(InvalidInputError):
    """Non-uniform grid or malformed input data."""


class DegenerateWindowError(InvalidInputError):
    pass


class ResolutionError(InvalidInputError):
    """Frequency grid too coarse for peak analysis."""


class StepSizeError(InvalidInputError):
    pass


class TruncationError(InvalidInputError):
    pass


class UnavailableError(InvalidInputError):
    """Requested quantity was not stored."""


class NumericalFailure(RuntimeError):
    pass


class SolverError(NumericalFailure):
    pass


class OracleError(NumericalFailure):
    pass


class PeakRangeError(NumericalFailure):
    """Half-maximum crossing lies outside the frequency grid."""
