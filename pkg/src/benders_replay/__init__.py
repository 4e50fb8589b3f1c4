"""Benders decomposition for sequences of SAA replications with information reuse."""

__version__ = "0.1.0"
