"""Exception hierarchy shared by all modules."""


class ResdecayError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameterError(ResdecayError, ValueError):
    pass


class DegenerateWavenumberError(ResdecayError, ValueError):
    """Some local wavenumber sqrt(k^2 - V_j) vanished; perturb k and retry."""


class IncompleteSearchError(ResdecayError):
    """Argument-principle count disagrees with the zeros located in a box."""

    def __init__(self, message, box=None, expected=None, found=None):
        super().__init__(message)
        self.box = box
        self.expected = expected
        self.found = found


class DegenerateStateError(ResdecayError):
    pass


class ImproperPoleError(ResdecayError):
    """A retained pole violates Re k > -Im k, so the exponential split is invalid."""


class OutOfRangeError(ResdecayError, ValueError):
    """Argument outside the validity range of an asymptotic formula."""


class RangeOverflowError(ResdecayError, OverflowError):
    pass


class AccuracyError(ResdecayError):
    pass


class NoTransitionError(ResdecayError):
    pass


class ConfigError(ResdecayError, ValueError):
    pass


class UnsupportedPoleError(ResdecayError):
    """Pole structure outside the supported set (antibound or coalescing poles)."""
