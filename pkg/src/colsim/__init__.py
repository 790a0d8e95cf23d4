"""Collisional-model simulator for a qubit in a time-correlated environment."""

__version__ = "0.1.0"
