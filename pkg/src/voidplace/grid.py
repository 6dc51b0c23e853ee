"""Uniform 1-D grid over a bounded segment, with midpoint quadrature."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid1D:
    """Uniform discretization of a segment ``[origin, origin + n_cells * spacing)``.

    Cell centers double as the candidate sensor locations.
    """

    origin: float
    spacing: float
    n_cells: int

    def __post_init__(self):
        if not (np.isfinite(self.spacing) and self.spacing > 0):
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ValueError(f"n_cells must be a positive integer, got {self.n_cells}")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "origin", float(self.origin))
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def length(self) -> float:
        return self.n_cells * self.spacing

    @property
    def centers(self) -> np.ndarray:
        return self.origin + (np.arange(self.n_cells) + 0.5) * self.spacing

    def cell_center(self, i: int) -> float:
        return cell_center(self, i)

    def integrate(self, values) -> float:
        return integrate(self, values)

    def to_dict(self) -> dict:
        return {"origin_m": self.origin, "spacing_m": self.spacing, "n_cells": self.n_cells}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid1D":
        return cls(origin=d.get("origin_m", 0.0), spacing=d["spacing_m"], n_cells=d["n_cells"])


def cell_center(grid: Grid1D, i: int) -> float:
    """Position in meters of the center of cell ``i``."""
    if not 0 <= i < grid.n_cells:
        raise IndexError(f"cell index {i} out of range [0, {grid.n_cells})")
    return grid.origin + (i + 0.5) * grid.spacing


def integrate(grid: Grid1D, values) -> float:
    """Midpoint-rule integral of per-cell values over the segment."""
    v = np.asarray(values, dtype=float)
    if v.shape != (grid.n_cells,):
        raise ValueError(f"expected {grid.n_cells} values, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("integrand contains non-finite values")
    return float(v.sum() * grid.spacing)
