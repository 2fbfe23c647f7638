class StubError(Exception):
    """Base class for pipeline errors."""


class ConfigurationError(StubError):
    pass


class DataError(StubError):
    pass
