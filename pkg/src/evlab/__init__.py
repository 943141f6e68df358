"""Numerical lab for uniform maximum and anti-maximum principles of discretized operators."""

__version__ = "0.1.0"
