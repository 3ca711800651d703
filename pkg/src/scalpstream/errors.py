"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid configuration value (band edges, grid size, scenario fields...)."""


class CalibrationError(RuntimeError):
    """Calibration missing or too short for the requested operation."""


class ParseError(ValueError):
    """Malformed input file; carries a line number when one makes sense."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}:"
        if line is not None:
            loc += f"{line}:"
        super().__init__(f"{loc} {message}" if loc else message)
        self.path = path
        self.line = line


class RankError(ArithmeticError):
    """Numerically rank-deficient system; regularization required."""


class ModelError(ValueError):
    """Inconsistent forward/inverse model (zero columns, bad resolution terms)."""
