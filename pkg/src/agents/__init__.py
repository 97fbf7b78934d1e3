"""Agent assemblies and per-step action orchestration."""
