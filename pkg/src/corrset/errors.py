"""Exception hierarchy shared by every corrset module."""


class CorrsetError(Exception):
    """Base class for all library errors."""


class InputError(CorrsetError, ValueError):
    """Malformed word, cylinder or argument."""


class PrefixTooShortError(InputError):
    """A finite prefix does not cover the requested windows."""


class MeasureError(CorrsetError, ValueError):
    """Invalid measure or measure-preserving system description."""


class PrecisionError(CorrsetError):
    """The configured working precision cannot resolve the request."""


class ConstructionError(CorrsetError):
    """A word construction hit its length limit before certifying."""


class CertificationError(CorrsetError):
    """A constructed object failed its post-verification."""


class ScheduleError(CorrsetError):
    """Schedule lookups or stage limits out of range."""
