"""Exception hierarchy for the tracking engine.

Library code raises these; only the command layer turns them into exit
codes (see tracker_utils.runner.resolve_exit_code).
"""


class TrackerError(Exception):
    """Base class for every error raised by the engine."""
    pass


class DimensionMismatchError(TrackerError, ValueError):
    """Raised when spectra, samples or labels disagree in shape or channel count."""
    pass


class DegenerateBoxError(TrackerError, ValueError):
    """Raised for boxes or sizes with non-positive or non-finite extent."""
    pass


class ConfigError(TrackerError):
    """Raised for unknown keys, unparseable values or violated config invariants."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class ColorTableError(TrackerError):
    """Raised when the color-names table resource is missing or malformed."""
    pass


class SequenceFormatError(TrackerError):
    """Raised for a malformed sequence directory or groundtruth file."""
    pass


class ResultsFormatError(TrackerError):
    """Raised when a results file cannot be parsed."""
    pass


class EvaluationError(TrackerError):
    """Raised when metrics cannot be computed (length mismatch, empty frame set)."""
    pass


class ScenarioError(TrackerError):
    """Raised for invalid synthetic scenarios or unknown preset names."""
    pass
