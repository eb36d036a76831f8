"""Shared exception types."""


class GiftworldError(Exception):
    """Base class for all package errors."""


class ContractViolation(GiftworldError):
    """An operation was called with arguments violating its contract."""


class ConfigError(GiftworldError):
    """Invalid configuration values (ranges, schema, presets)."""


class DomainError(GiftworldError):
    """Input is outside the mathematical domain of an operation."""
