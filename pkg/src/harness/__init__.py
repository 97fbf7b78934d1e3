"""Experiment orchestration, statistics and reporting."""
