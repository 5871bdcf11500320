"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operator/state dimensions are invalid or incompatible."""


class IntegrationError(RuntimeError):
    """Master-equation integration could not proceed (e.g. step underflow)."""


class ConfigError(ValueError):
    """Run configuration is malformed or inconsistent."""
