"""Dualplan - self-model planning agents in a predator/prey survival box."""

__version__ = '0.1.0'
