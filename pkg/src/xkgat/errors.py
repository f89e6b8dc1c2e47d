"""Exception types shared across the toolkit."""


class XkgatError(Exception):
    """Base class for toolkit errors."""


class ParseError(XkgatError):
    """Malformed input file."""


class DataError(XkgatError):
    """Inconsistent or unusable data/configuration."""
