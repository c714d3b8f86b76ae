"""
Custom exceptions for the gimvip solver.

Every error carries an ErrorData record whose code is also the process exit code the
CLI reports for it.
"""

from typing import Any, Optional

from pydantic import BaseModel

EXIT_OK = 0
EXIT_VERDICT_FAILURE = 1
EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3


class ErrorData(BaseModel):
    """Structured error payload."""

    code: int
    message: str
    data: Optional[Any] = None


class GimvipError(Exception):
    """
    Base exception class for solver errors.

    This exception holds ErrorData information so the shell can turn it into an exit
    code and a JSON error document.
    """

    default_code = EXIT_NUMERICAL_FAILURE

    def __init__(self, message: str, data: Optional[Any] = None, code: Optional[int] = None):
        """
        Initialize GimvipError.

        Args:
            message: Human readable description
            data: Optional structured context (offending field, step index, ...)
            code: Overrides the class default code
        """
        self.error_data = ErrorData(
            code=self.default_code if code is None else code, message=message, data=data
        )
        super().__init__(message)

    @property
    def code(self) -> int:
        """Get the error code."""
        return self.error_data.code

    @property
    def message(self) -> str:
        """Get the error message."""
        return self.error_data.message

    @property
    def data(self) -> Optional[Any]:
        """Get additional error data."""
        return self.error_data.data


class ProblemLoadError(GimvipError):
    """A problem document violates the schema; data names the offending field."""

    default_code = EXIT_INPUT_ERROR


class DimensionMismatchError(GimvipError):
    default_code = EXIT_INPUT_ERROR


class UnknownCustomError(GimvipError):
    """A Custom operator or SeparableCustom1D function name is not registered."""

    default_code = EXIT_INPUT_ERROR


class ConfigError(GimvipError):
    """Invalid regime, integrator or method parameters."""

    default_code = EXIT_INPUT_ERROR


class UnsupportedPairError(GimvipError):
    """No prox is available for the requested (g, omega) combination."""

    default_code = EXIT_INPUT_ERROR


class InvalidConstantsError(GimvipError):
    """Constants fail a precondition (invalid radicand, m <= 0, ...)."""

    default_code = EXIT_VERDICT_FAILURE


class NonConvergenceError(GimvipError):
    default_code = EXIT_NUMERICAL_FAILURE


class NonFiniteStateError(GimvipError):
    """The state became NaN/inf; data holds the step or iteration index."""

    default_code = EXIT_NUMERICAL_FAILURE
