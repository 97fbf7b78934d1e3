"""Utilities package for Dualplan."""
