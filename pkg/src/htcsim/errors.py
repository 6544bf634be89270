"""
Exception hierarchy for htcsim.

Everything raised on purpose by the library derives from HtcSimError so that
callers (and the command line) can separate simulator errors from bugs.
"""


class HtcSimError(Exception):
    """Base class for all htcsim errors."""

    pass


class ConfigurationError(HtcSimError, ValueError):
    """
    Raised when operands or configuration do not fit together.

    Covers polarity/width mismatches, stream length mismatches, invalid fan-in,
    duplicate unary delays, unknown designs and malformed run configuration.
    """

    pass


class RangeError(HtcSimError, ValueError):
    """Raised when a numeric code lies outside its representable range."""

    pass


class ImageError(HtcSimError, ValueError):
    """Raised for empty images or images whose dimensions do not match."""

    pass


class PgmError(HtcSimError):
    """Base class for PGM parse errors."""

    pass


class PgmHeaderError(PgmError):
    """Malformed or unsupported PGM header."""

    pass


class PgmMaxvalError(PgmError):
    """PGM maxval outside 1..255."""

    pass


class PgmTruncatedError(PgmError):
    """PGM payload shorter than width * height samples."""

    pass
