"""Momentum-space entanglement of spin chains."""

__version__ = "0.1.0"
