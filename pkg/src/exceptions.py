from typing import Optional


class SvcqError(Exception):
    """Base class for all svcq errors"""


class InputError(SvcqError, ValueError):
    """Malformed user input: CSV content, labels, dimensions, parameter ranges"""


class SingularSystemError(SvcqError):
    """The LS-SVM system could not be solved even after diagonal jitter"""

    def __init__(self, message: str, condition: Optional[float] = None):
        super().__init__(message)
        self.condition = condition


class SpectralFilterError(SvcqError):
    """Every eigenvalue fell below the inversion floor"""
