"""Exception hierarchy.

Every error raised on purpose by the package derives from ``RiskCornersError``,
which is itself a ``ValueError`` so callers that only know about bad values
keep working.
"""


class RiskCornersError(ValueError):
    """Root of all package errors."""


class DomainError(RiskCornersError):
    """A utility was evaluated outside its domain (e.g. non-positive wealth under CRRA)."""

    def __init__(self, argument: str, message: str):
        self.argument = argument
        super().__init__(f"{argument}: {message}")


class RangeError(RiskCornersError):
    """A choice variable lies outside its feasible interval."""


class ArgumentError(RiskCornersError):
    """Inputs are individually valid but inconsistent with each other."""


class InfeasibleError(RiskCornersError):
    """The feasible choice set is empty after domain clipping."""


class NoThresholdError(RiskCornersError):
    """Bracket expansion never produced a change of choice.

    ``monotone_side`` is the choice made everywhere on the searched range.
    """

    def __init__(self, message: str, monotone_side: float):
        self.monotone_side = monotone_side
        super().__init__(f"{message} (choice is {monotone_side:g} on the whole range)")


class ScheduleError(RiskCornersError):
    """A break-even repayment schedule is undefined."""


class EmptyInputError(RiskCornersError):
    """An input file or sequence holds no records."""


class RecordError(RiskCornersError):
    """An input file could not be read, or one or more of its rows failed validation.

    ``rows`` holds the 1-based data row numbers (header excluded); it is empty
    when the file itself is unreadable.
    """

    def __init__(self, message: str, rows: list[int] | None = None):
        self.rows = rows or []
        super().__init__(message)


class DegenerateFitError(RiskCornersError):
    """A calibration cannot be fitted from the given groups."""
