"""Exception types shared across Dualplan packages."""


class ConfigError(ValueError):
    """Invalid or unknown configuration."""


class EnvUsageError(RuntimeError):
    """Environment used outside its contract (e.g. stepping a finished episode)."""


class SimulationError(ArithmeticError):
    """World-model simulation produced non-finite values."""


class PlotDataError(ValueError):
    """Malformed episode log row."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class UsageError(Exception):
    """Bad command-line usage (exit code 1)."""
