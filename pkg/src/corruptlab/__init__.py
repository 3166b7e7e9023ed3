"""Adaptive versus oblivious corruption models on finite domains."""

__version__ = "0.1.0"
