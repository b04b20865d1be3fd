"""Feature extraction from pretrained speech encoders into LADF files."""

__version__ = "0.1.0"
