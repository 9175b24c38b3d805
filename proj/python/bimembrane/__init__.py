"""Numerical lab for the constrained two-phase Bernoulli problem (u >= v >= 0)."""

from ._bimembrane import (
    FieldPair,
    GridIoError,
    boundary_samples,
    energy,
    flatness,
    frequency_trace,
    planted,
    preset_names,
    project_cone,
    read_grid,
    signorini,
    solve,
)

__all__ = [
    "FieldPair",
    "GridIoError",
    "boundary_samples",
    "energy",
    "flatness",
    "frequency_trace",
    "planted",
    "preset_names",
    "project_cone",
    "read_grid",
    "signorini",
    "solve",
]
