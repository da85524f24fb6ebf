class DepthNormalError(Exception):
    """Base class for every error raised by this package."""


class ShapeMismatchError(DepthNormalError, ValueError):
    pass


class ConfigError(DepthNormalError, ValueError):
    pass


class EmptyInputError(DepthNormalError, ValueError):
    pass


class PFMError(DepthNormalError):
    pass


class PFMHeaderError(PFMError):
    """Header line missing, unparsable, or with a bad scale."""


class PFMTruncatedError(PFMError):
    """Payload shorter than the header promises."""


class PFMFormatError(PFMError):
    """Magic is not a PFM channel layout this package handles."""
