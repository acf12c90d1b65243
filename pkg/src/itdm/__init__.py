"""Quantum metrology with time-flipped encodings."""

__version__ = "0.1.0"
