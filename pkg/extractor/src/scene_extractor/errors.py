"""Error taxonomy for the extractor."""


class ExtractorError(Exception):
    """Base class for everything this package raises on purpose."""


class FormatError(ExtractorError):
    """An input file does not follow its contract."""


class ModelUnavailableError(ExtractorError):
    """Model mode was requested but its dependencies are not usable."""
