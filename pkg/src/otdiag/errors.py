"""Exception hierarchy for otdiag."""


class OTDError(Exception):
    """Base class for all errors raised by otdiag."""


class ModeError(OTDError, ValueError):
    """Mode index outside {1, 2, 3}."""


class ShapeError(OTDError, ValueError):
    """Array dimensions do not match what the operation expects."""


class PivotError(OTDError, IndexError):
    """Pivot pair out of range or not ordered as i < j."""


class RotationError(OTDError, ValueError):
    """Cosine/sine pair does not lie on the unit circle."""


class ConfigError(OTDError, ValueError):
    """Invalid run configuration (eta, tolerances, sweep budget...)."""


class NumericError(OTDError, ArithmeticError):
    """An iterative numerical routine failed or an invariant drifted."""


class ParseError(OTDError, ValueError):
    """Malformed tensor, matrix or ordering file.

    Parameters
    ----------
    message : str
        What went wrong.
    line : int, optional
        1-based line number of the offending input line.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
