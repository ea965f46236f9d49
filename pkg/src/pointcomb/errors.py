"""Shared exception types."""


class CoverageError(ValueError):
    """An averaging region exceeds the faithful region of a patch."""


class UnboundedRegionError(ValueError):
    """A region that must be bounded is not."""


class UnsupportedTransformError(ValueError):
    """A weight function has no supported closed-form transform for the request."""


class ConfigError(ValueError):
    """A scene configuration failed to parse or validate.

    ``location`` names the offending key path or line, when known.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)
