"""dctwin: data-center inspection robot simulator, RMS, and digital twin."""

__version__ = "0.1.0"
