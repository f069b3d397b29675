"""Exception types shared across the pipeline."""


class PitchcastError(Exception):
    """Base class for all pipeline errors."""


class SchemaError(PitchcastError):
    """A required column is missing from the input file."""


class RowError(PitchcastError):
    """A single CSV row could not be parsed. Carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConsistencyError(RowError):
    """Provided goal difference or outcome contradicts the goal columns."""


class OrderError(PitchcastError):
    """Appended matches predate the existing store."""


class UnplayedMatch(PitchcastError):
    """A rating update was requested for a match without goals."""


class EmptyWindow(PitchcastError):
    """No decided matches in the requested rating window."""


class ColdStart(PitchcastError):
    """A team has no history and padding is disabled."""


class StaleSnapshot(PitchcastError):
    """Rating snapshot does not correspond to the requested match."""


class UnknownFeature(PitchcastError):
    """A feature name is not in the catalog."""


class DegenerateTarget(PitchcastError):
    """Target column has a single class or no variance."""


class TooFewInstances(PitchcastError):
    """Not enough instances per class for neighbor-based scoring."""


class NonFiniteFeature(PitchcastError):
    """A feature column contains inf values."""


class SchemaMismatch(PitchcastError):
    """Prediction rows do not cover the model's feature names."""


class InsufficientHistory(PitchcastError):
    """The store does not span the requested split windows."""


class EmptyInput(PitchcastError):
    """A metric was called with no data points."""


class InvalidSimplex(PitchcastError):
    """Probability triple is not a valid simplex point."""
