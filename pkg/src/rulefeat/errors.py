"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
anything else -> 4.
"""


class RulefeatError(Exception):
    """Base class for all package errors."""


class ConfigError(RulefeatError):
    """Invalid configuration, schema description, or CLI arguments."""


class DataError(RulefeatError):
    """Malformed or inconsistent input data."""


class FetchError(DataError):
    """Download or checksum failure while fetching a dataset file."""
