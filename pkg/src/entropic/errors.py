"""Exception types shared across the package."""


class EntropicError(Exception):
    """Base class for all errors raised by this package."""


class SignalError(EntropicError):
    """Invalid or unreadable signal input."""


class BarcodeError(EntropicError):
    """Invalid input to persistence computations."""


class TrainingError(EntropicError):
    """Invalid training data or configuration for the SVM."""


class StatsError(EntropicError):
    """Invalid input to a statistics routine (e.g. zero-variance sequence)."""


class DatasetError(EntropicError):
    """Malformed manifest, filename or corpus layout."""
