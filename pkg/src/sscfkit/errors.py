"""Exception types shared across the package."""


class SscfKitError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SscfKitError, ValueError):
    """Invalid extraction, filterbank or subband parameters."""


class ContractError(SscfKitError, ValueError):
    """An input violates an operation's precondition."""


class AudioFormatError(SscfKitError):
    """Unsupported or unreadable audio file."""
