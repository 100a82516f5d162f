"""Exception hierarchy shared by all modules."""


class MolcommError(Exception):
    """Base class for all package errors."""


class ParameterError(MolcommError, ValueError):
    """A physical or algorithmic parameter is outside its valid domain."""


class ConfigurationError(MolcommError, ValueError):
    """A combination of otherwise valid parameters cannot be realised."""


class FramingError(MolcommError, ValueError):
    """Received samples do not line up with the expected symbol schedule."""
