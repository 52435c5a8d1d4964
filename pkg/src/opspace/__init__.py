"""Finite-dimensional operator-space norms and inequality checks."""

__version__ = "0.1.0"
