"""Exception and warning types shared across the package."""


class MLBalanceError(Exception):
    """Base class for all errors raised by mlbalance."""


class StructuralError(MLBalanceError, ValueError):
    """A row, index or shape does not match the dataset structure."""


class DomainError(MLBalanceError, ValueError):
    """A nominal value lies outside the declared domain of its feature."""


class MetricError(MLBalanceError):
    """Imbalance metrics are undefined, e.g. no label has a positive count."""


class CacheError(MLBalanceError):
    """A neighbor cache cannot be built or does not match its dataset."""


class AlgorithmError(MLBalanceError):
    """A resampling algorithm cannot run on the given input."""


class DataFormatError(MLBalanceError):
    """An input file violates the expected ARFF/XML conventions."""


class ResampleWarning(UserWarning):
    """Non-fatal condition reported by a resampling algorithm."""
