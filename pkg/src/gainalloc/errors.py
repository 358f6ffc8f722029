"""Exception hierarchy shared across the package.

The CLI maps exception classes to process exit codes via ``exit_code``:
configuration problems exit 2, data problems 3, artifact mismatches 4.
"""

from __future__ import annotations


class GainAllocError(Exception):
    exit_code = 1


class ConfigurationError(GainAllocError):
    exit_code = 2


class DataError(GainAllocError):
    exit_code = 3


class CompatibilityError(GainAllocError):
    """Artifacts produced against different schemas cannot be combined."""

    exit_code = 4


class SchemaError(DataError):
    """Input violates the declared column/feature layout."""


class RowError(DataError):
    """A specific input row cannot be parsed."""

    def __init__(self, row_number: int, message: str) -> None:
        super().__init__(f"row {row_number}: {message}")
        self.row_number = row_number


class IntegrityError(DataError):
    """Values that must agree within a case do not."""


class LabelingConflictError(DataError):
    """A case (or the rules themselves) match both outcome classes."""


class InsufficientDataError(DataError):
    """Too few traces or samples for the requested operation."""


class DegenerateLabelsError(DataError):
    """Training data contains only one outcome class."""


class InsufficientArmError(DataError):
    """A treatment arm required for effect estimation is empty."""
