"""Semantic exceptions shared by all qspan modules."""

from __future__ import annotations


class QspanError(Exception):
    """Base class for all library errors."""


class DomainError(QspanError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularPointError(QspanError, ValueError):
    """Evaluation requested exactly at an integrable singularity."""


class NoSolutionError(QspanError, ValueError):
    """A root-finding problem has no solution in the admissible range."""


class AccuracyError(QspanError, RuntimeError):
    """A numerical routine could not reach the requested accuracy.

    Carries the best estimate and the achieved error so callers can decide
    whether to accept the degraded result.
    """

    def __init__(self, message: str, value: float | None = None,
                 achieved: float | None = None):
        super().__init__(message)
        self.value = value
        self.achieved = achieved


class SizeError(QspanError, ValueError):
    """A lattice is too large for dense exact diagonalization."""


class ConfigError(QspanError, ValueError):
    """A run configuration is malformed; message carries section/field info."""
