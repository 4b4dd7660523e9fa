"""Vision-only GUI record and replay across devices of different screen sizes."""

__version__ = "0.1.0"
