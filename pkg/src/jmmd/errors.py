"""Exception types shared across the package."""


class JmmdError(Exception):
    """Base class for every error raised by this package."""


class DomainError(JmmdError, ValueError):
    """A value lies outside the domain required by a family or formula."""


class SingularDesign(JmmdError):
    """The weighted normal equations are rank deficient beyond tolerance."""


class NonConvergence(JmmdError):
    """An iterative fit hit its iteration cap.

    For joint fits the partially converged state is attached as
    ``last_fit`` so callers can inspect it.
    """

    def __init__(self, message: str, last_fit=None):
        super().__init__(message)
        self.last_fit = last_fit


class DegenerateResponse(JmmdError):
    """The response carries no variation, so an R-squared is undefined."""


class PenaltyOverflow(JmmdError):
    """A penalised criterion has a non-positive degrees-of-freedom term."""


class NegativeImprovement(JmmdError):
    """A nested model fits worse than its sub-model beyond tolerance."""


class UnknownParent(JmmdError):
    """An interaction term references a factor that was never declared."""


class UnknownTerm(JmmdError):
    """A term label cannot be resolved against the dataset columns."""


class DispersionOutOfRange(JmmdError):
    """A generated dispersion value violates the generator's domain."""


class IterationCap(JmmdError):
    """The joint selection loop exceeded its cycle limit."""


class IoError(JmmdError):
    """A result file could not be written or read."""


class DatasetError(JmmdError):
    """Base class for dataset ingestion failures."""


class ParseError(DatasetError):
    """A cell could not be parsed; carries 1-based row/column location."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        super().__init__(message)
        self.row = row
        self.col = col


class NonNumericCell(ParseError):
    """A body cell is empty or not a number."""


class MissingColumn(DatasetError):
    """A required column is absent from the file."""


class EmptyFile(DatasetError):
    """The file has no header or no data rows."""
