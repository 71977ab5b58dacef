"""Exception hierarchy for dirdep

Every error raised on purpose by the library derives from DirdepError so
the CLI can map it onto an exit code.
"""


class DirdepError(Exception):
    """Base class for all dirdep errors"""
    pass


class InputError(DirdepError):
    """Raised when input data is malformed (shape, finiteness, unit norm)"""
    pass


class ConfigurationError(DirdepError):
    """Raised when configuration is invalid or cannot be loaded"""
    pass


class DegenerateMarginalError(DirdepError):
    """Raised when a marginal sample carries no spread (constant sample)"""
    pass


class SamplerError(DirdepError):
    """Raised when a random generator cannot produce the requested draws"""
    pass
