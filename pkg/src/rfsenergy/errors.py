"""Exception and warning types shared across the package.

Every domain failure raises a subclass of :class:`RfsEnergyError`, which the
CLI maps to exit code 1 (usage errors exit 2).
"""


class RfsEnergyError(Exception):
    """Base class for all domain errors raised by this package."""


class FormatError(RfsEnergyError):
    """A binary descriptor-set file has a bad magic, version, or layout."""


class TruncationError(FormatError):
    """Declared payload sizes exceed the bytes actually present."""


class DataError(RfsEnergyError):
    """A payload contains non-finite (NaN/Inf) values."""


class ValidationError(RfsEnergyError):
    """A manifest or config document violates its invariants."""


class EstimationError(RfsEnergyError):
    """Model fitting was asked to run on unusable input."""


class ModelError(RfsEnergyError):
    """A fitted model is unusable (e.g. covariance factorization failed)."""


class ScoringError(RfsEnergyError):
    """A set could not be scored against a model."""


class EvaluationError(RfsEnergyError):
    """Evaluation input is unusable (missing files, single-class labels)."""


class DegenerateModelWarning(UserWarning):
    """Fitting succeeded but produced a degenerate model (e.g. rho == 0)."""


class DegenerateInputWarning(UserWarning):
    """A scored input is degenerate (e.g. an empty descriptor set)."""
