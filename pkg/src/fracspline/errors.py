"""Exception types shared across the package."""


class NumericsError(RuntimeError):
    """A numerical procedure failed to meet its accuracy or convergence contract."""


class ConfigError(ValueError):
    """A run configuration is syntactically or semantically invalid."""
