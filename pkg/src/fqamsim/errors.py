class ConfigurationError(ValueError):
    """Invalid parameter or configuration value."""


class UsageError(ValueError):
    """Operation called with arguments of the wrong shape or length."""
