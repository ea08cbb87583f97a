"""Noisy Operations: majorization, protocol synthesis and information rates."""

__version__ = "0.1.0"
