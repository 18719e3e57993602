"""Exact non-signalling boxes, constraint families and partition attacks."""

__version__ = "0.1.0"
