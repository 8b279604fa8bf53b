"""Diffusion cascade reconstruction, user bridging scores and well-being analytics."""

__version__ = "0.1.0"
