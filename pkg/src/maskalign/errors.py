"""Shared exception types."""


class ConfigError(Exception):
    """Raised when a config file, bank definition, or CLI option is invalid.

    The message always names the offending key or path so the problem can
    be located without a debugger.
    """
