class ExtractorError(Exception):
    """Base class for extraction failures."""


class ManifestError(ExtractorError):
    """Malformed manifest or alignment input."""


class ModelMismatch(ExtractorError):
    """Encoder geometry disagrees with the manifest's expectations."""
