"""Construction-free median quasi-Monte Carlo rules."""

__version__ = "0.1.0"
