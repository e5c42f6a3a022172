"""Exception hierarchy shared across the package.

The split between :class:`ConfigError` and :class:`DataError` mirrors the
CLI exit-code contract: config problems exit 1, data problems exit 2.
"""


class BotuneError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(BotuneError):
    """Malformed configuration: experiment config files, schema files, bad keys."""


class DataError(BotuneError):
    """Bad data content: unparsable cells, empty files, degenerate classes."""


class SchemaError(DataError):
    """A CSV file does not match its declared schema."""


class NumericalError(BotuneError):
    """A numerical routine broke down (failed factorization, singular matrix)."""
