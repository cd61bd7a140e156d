"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
ScorerTransportError -> 4.
"""


class ValueLensError(Exception):
    """Base class for all package errors."""


class ConfigError(ValueLensError):
    """Invalid run configuration or command usage."""


class DataError(ValueLensError):
    """Input data is unreadable, malformed or insufficient."""


class DumpFormatError(DataError):
    """Dump stream uses an unreadable or unsupported compression/format."""


class ScorerError(ValueLensError):
    """Base class for scorer failures."""


class ScorerTransportError(ScorerError):
    """Remote scorer unreachable or persistently failing; retryable at the
    transport level, fatal for the run once retries are exhausted."""


class ScorerContractError(ScorerError):
    """Remote scorer returned a response violating the wire contract
    (wrong shape, value out of range, non-finite float)."""
