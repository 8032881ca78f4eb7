"""Exception types raised across the package."""


class DPMixError(Exception):
    """Base class for package errors."""


class ResourceLimitError(DPMixError):
    """A requested computation exceeds a configured enumeration cap."""


class ContractError(DPMixError, ValueError):
    """Arguments violate a function's preconditions."""


class ConfigError(DPMixError, ValueError):
    """An experiment or chain configuration is invalid."""
