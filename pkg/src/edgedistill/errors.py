"""Exception hierarchy shared by every module of the simulator."""


class EdgeDistillError(Exception):
    """Base class for all simulator errors."""


class InvalidInputError(EdgeDistillError, ValueError):
    """Malformed data: non-finite logits, wrong shapes, bad distributions."""


class InvalidParameterError(EdgeDistillError, ValueError):
    """A scalar parameter (temperature, threshold, bandwidth) is out of range."""


class InvalidLabelError(InvalidInputError):
    pass


class OracleFailureError(EdgeDistillError, ArithmeticError):
    """The finite-difference oracle evaluated to a non-finite value."""


class TrainingFailureError(EdgeDistillError, ArithmeticError):
    pass


class ConfigurationError(EdgeDistillError, ValueError):
    pass


class UndefinedMetricError(EdgeDistillError, ZeroDivisionError):
    """A metric was requested over an empty population."""


class CSVParseError(EdgeDistillError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
