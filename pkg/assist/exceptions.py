"""
Custom exceptions for the ASSIST trace regression library.
"""

from typing import Any, Dict, Optional


class AssistException(Exception):
    """Base exception for ASSIST errors."""

    def __init__(self, error_message: str, details: Optional[Dict[str, Any]] = None):
        """
        Initialize ASSIST exception.

        Args:
            error_message: Human readable error message
            details: Structured context (offending values, positions, ...)
        """
        self.error_message = error_message
        self.details = details or {}
        super().__init__(error_message)

    def __reduce__(self):
        # Rebuild from the instance state so joblib workers can re-raise us.
        return _rebuild_exception, (type(self), dict(self.__dict__))


def _rebuild_exception(cls, state):
    exc = cls.__new__(cls)
    Exception.__init__(exc, state.get("error_message", ""))
    exc.__dict__.update(state)
    return exc


class ValidationException(AssistException):
    """Exception raised when an input fails validation."""
    pass


class InfeasibleBudgetException(ValidationException):
    """Exception raised when rank/support budgets do not fit the matrix dimensions."""

    def __init__(self, r: int, s1: int, s2: int, d1: int, d2: int):
        """
        Initialize infeasible budget exception.

        Args:
            r: Rank budget
            s1: Row support budget
            s2: Column support budget
            d1: Number of matrix rows
            d2: Number of matrix columns
        """
        self.budgets = (r, s1, s2)
        self.dims = (d1, d2)
        super().__init__(
            f"Infeasible budgets (r={r}, s1={s1}, s2={s2}) for a {d1}x{d2} matrix; "
            f"need 1 <= r <= min(s1, s2), s1 <= d1, s2 <= d2",
            {"r": r, "s1": s1, "s2": s2, "d1": d1, "d2": d2},
        )


class SolverDivergenceException(AssistException):
    """Exception raised when the solver produces non-finite iterates."""

    def __init__(self, error_message: str, level: Optional[float] = None, **kwargs):
        """
        Initialize solver divergence exception.

        Args:
            error_message: Error message
            level: Level pi at which the fit diverged, if known
        """
        self.level = level
        if level is not None:
            error_message = f"{error_message} (level {level:+.6g})"
        super().__init__(error_message, **kwargs)


class ComputationException(AssistException):
    """Exception raised when a numerical routine fails, e.g. an SVD that does not converge."""
    pass


class DecodeException(AssistException):
    """Exception raised when a dataset, triplet, model or config file is malformed."""

    def __init__(self, error_message: str, path: Optional[str] = None, row: Optional[int] = None):
        """
        Initialize decode exception.

        Args:
            error_message: Error message
            path: File being decoded
            row: 1-based line number of the offending row
        """
        self.path = path
        self.row = row
        location = ""
        if path is not None:
            location = f"{path}"
            if row is not None:
                location += f":{row}"
            location += ": "
        super().__init__(f"{location}{error_message}", {"path": path, "row": row})


class SchemaVersionException(DecodeException):
    """Exception raised when a file carries an unsupported schema version."""
    pass


class EmptyDatasetException(DecodeException):
    """Exception raised when a file holds no samples."""
    pass
