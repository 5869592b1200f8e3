class ScaleplanError(Exception):
    """Base class for errors raised by this package."""


class DomainError(ScaleplanError, ValueError):
    """An argument lies outside the domain of a model or operation."""


class InsufficientDataError(DomainError):
    """Too few usable observations to determine the model coefficients."""


class DegenerateFitError(DomainError):
    """Fitted coefficients cannot be mapped back to valid model parameters."""


class InfeasiblePlanError(DomainError):
    """The requested capacity cannot be met by the given hardware."""


class ParseError(ScaleplanError, ValueError):
    """An input file or command line value could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
