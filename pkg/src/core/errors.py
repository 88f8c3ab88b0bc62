"""Exception hierarchy shared by the services and the CLI.

Each exception carries the process exit code the CLI reports for it.
"""


class QkdNetError(Exception):
    """Base class for every error raised on purpose by this package."""

    exit_code = 4


class ConfigError(QkdNetError):
    """Missing, unparsable or invalid configuration."""

    exit_code = 2


class ModelDomainError(QkdNetError, ValueError):
    """Inputs fall outside the range where the analytical model is defined."""

    exit_code = 3


class DegenerateLinkError(ModelDomainError):
    """Zero gain or zero single-photon yield; the key-rate bound is undefined."""


class CapacityError(ModelDomainError):
    """More codes or users requested than the code family can hold."""


class InternalError(QkdNetError):
    """A search or simulation failed where the model says it should succeed."""

    exit_code = 4
