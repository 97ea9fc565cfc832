"""Exception hierarchy shared by every setsim module."""


class SetsimError(Exception):
    """Base class for all setsim errors."""


class ParseError(SetsimError):
    """A scenario document could not be parsed."""


class ValidationError(SetsimError):
    """A configuration value violates an invariant."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(SetsimError, ValueError):
    """A numeric argument lies outside the domain of a model function."""


class OrderingError(SetsimError, ValueError):
    """Timestamps were supplied out of order."""


class IllegalTransition(SetsimError):
    """An event was delivered to a controller in a mode that cannot accept it."""

    def __init__(self, mode, event):
        self.mode = mode
        self.event = event
        super().__init__(f"event {event.name} is illegal in mode {mode.name}")


class InsufficientData(SetsimError):
    """Not enough data to compute a derived quantity."""


class InternalInconsistency(SetsimError):
    """An engine invariant was breached. Always a bug."""


class NonConvergenceWarning(UserWarning):
    """The power optimizer hit its sweep limit before meeting tolerance."""


class IoError(SetsimError):
    """Reading or writing an output file failed."""

    def __init__(self, path, reason):
        self.path = path
        super().__init__(f"{path}: {reason}")


class CellError(SetsimError):
    """A sweep cell failed; wraps the original error with the cell it came from."""

    def __init__(self, algorithm, value, cause):
        self.algorithm = algorithm
        self.value = value
        self.cause = cause
        super().__init__(f"cell ({algorithm}, {value}) failed: {cause}")
