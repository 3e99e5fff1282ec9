"""Podcast corpus construction and ecosystem analytics."""

__version__ = "0.1.0"
