"""Survival environment and reflexive overrides."""
