"""Shared exception types.

Grouped here so the CLI can map error classes onto exit codes without
importing every module.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid or contradictory run configuration."""


class GridTooSmallError(ValueError):
    """Position grid cannot hold the requested state's probability mass."""


class GridMismatchError(ValueError):
    """Two grid-backed objects live on different position grids."""


class InsufficientCutoffError(ValueError):
    """Fock truncation leaves more than the allowed tail mass."""


class ScheduleError(ValueError):
    """Drive schedule request violates its structural constraints."""


class StepSizeError(RuntimeError):
    """Integrator tolerance breach (trace or Hermiticity drift)."""
