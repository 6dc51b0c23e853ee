"""Gaussian-footprint detection model and miss probabilities of sensor sets."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid1D


@dataclass(frozen=True)
class SensorParams:
    """``rho`` is the peak detection probability; ``sigma_l`` divides the
    squared sensor-target distance (m^2) in the exponent."""

    rho: float = 0.95
    sigma_l: float = 0.9

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho}")
        if not (np.isfinite(self.sigma_l) and self.sigma_l > 0):
            raise ValueError(f"sigma_l must be positive, got {self.sigma_l}")

    def to_dict(self) -> dict:
        return {"rho": self.rho, "sigma_l": self.sigma_l}

    @classmethod
    def from_dict(cls, d: dict) -> "SensorParams":
        return cls(rho=d["rho"], sigma_l=d["sigma_l"])


@dataclass(frozen=True)
class Placement:
    """Sensor cell indices in selection order."""

    cells: tuple
    grid: Grid1D

    def __post_init__(self):
        cells = tuple(int(c) for c in self.cells)
        if len(set(cells)) != len(cells):
            raise ValueError(f"duplicate sensor cells in {cells}")
        for c in cells:
            if not 0 <= c < self.grid.n_cells:
                raise ValueError(f"sensor cell {c} outside [0, {self.grid.n_cells})")
        object.__setattr__(self, "cells", cells)

    def __len__(self):
        return len(self.cells)

    @property
    def positions(self) -> np.ndarray:
        return self.grid.centers[list(self.cells)] if self.cells else np.empty(0)

    def prefix(self, m: int) -> "Placement":
        return Placement(self.cells[:m], self.grid)

    def add(self, cell: int) -> "Placement":
        return Placement(self.cells + (int(cell),), self.grid)


def detect_prob(params: SensorParams, s, a):
    """Probability that a sensor at ``a`` detects a target at ``s``."""
    d = np.asarray(s, dtype=float) - np.asarray(a, dtype=float)
    out = params.rho * np.exp(-(d * d) / params.sigma_l)
    return float(out) if np.ndim(out) == 0 else out


def miss_prob(params: SensorParams, s: float, placement: Placement) -> float:
    """Probability that every sensor in ``placement`` misses a target at ``s``."""
    out = 1.0
    for a in placement.positions:
        out *= 1.0 - detect_prob(params, s, a)
    return float(out)


def detection_matrix(params: SensorParams, grid: Grid1D, cells=None) -> np.ndarray:
    """``G[k, i]`` = detection probability at cell ``i`` for a sensor at ``cells[k]``."""
    c = grid.centers
    a = c if cells is None else c[np.asarray(cells, dtype=int)]
    return detect_prob(params, c[None, :], a[:, None])


def miss_prob_field(params: SensorParams, grid: Grid1D, placement: Placement) -> np.ndarray:
    """Miss probability at every cell center, multiplied in selection order."""
    field = np.ones(grid.n_cells)
    if placement.cells:
        G = detection_matrix(params, grid, placement.cells)
        for row in G:
            field = update_miss_field(field, row)
    return field


def update_miss_field(field: np.ndarray, detect_row: np.ndarray) -> np.ndarray:
    """Miss field after adding one sensor with per-cell detection ``detect_row``."""
    return field * (1.0 - detect_row)
