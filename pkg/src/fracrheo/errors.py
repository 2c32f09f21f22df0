"""Exception hierarchy shared across the package."""


class FracRheoError(Exception):
    """Base class for all package errors."""


class DomainError(FracRheoError, ValueError):
    """Input outside the mathematical domain of an operation."""


class DataError(FracRheoError, ValueError):
    """Malformed or inconsistent experimental data."""


class SchemaError(DataError):
    """Input file does not match the expected column schema."""


class ConfigError(FracRheoError, ValueError):
    """Invalid optimizer or run configuration."""


class FitError(FracRheoError, RuntimeError):
    """Calibration could not produce a usable result."""
