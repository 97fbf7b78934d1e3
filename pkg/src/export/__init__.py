"""Export utilities (e.g., Excel summary reports)."""
