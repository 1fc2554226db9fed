"""Exception types shared across the package."""

from __future__ import annotations


class LengthMismatch(ValueError):
    """Two sequences that must have equal length do not."""


class EmptySample(ValueError):
    """An operation received a zero-length sample."""


class InvalidThreshold(ValueError):
    """A threshold parameter lies outside its legal range."""


class InvalidDiversity(ValueError):
    """A dataset failed the pairwise-diversity gate where it is required."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"diversity validation failed: {report.describe()}")


class PreconditionViolation(ValueError):
    """An operation received inputs that break its stated precondition."""


class SpecOutOfRange(ValueError):
    """A target spec references a branch index that does not exist."""


class WidthTooLarge(ValueError):
    """A soft-boundary width is as large as the sequence itself."""


class DimensionMismatch(ValueError):
    """Array shapes disagree with the declared target/weight layout."""


class NonFiniteLoss(ArithmeticError):
    """Training aborted because the loss became NaN or infinite."""


class PlacementInfeasible(RuntimeError):
    """Ground-truth interval placement exhausted its rejection budget."""


class DiversityUnreachable(RuntimeError):
    """Annotator redraws exhausted without reaching pairwise diversity."""


class MissingTruth(ValueError):
    """An evaluation was requested on a dataset without ground truth."""


class ConfigError(ValueError):
    """Configuration parsing or validation failure, carrying the field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
