"""Heisenberg-type groups over abstract Wiener spaces: exact algebra and Monte Carlo checks."""

__version__ = "0.1.0"
