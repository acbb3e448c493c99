"""Fraction of the direction sphere touched by measurements.

Directions are binned on a fixed (theta, phi) grid with theta the azimuth in
[0, 2pi) and phi the polar angle in [0, pi]. Coverage is the solid angle of
occupied cells over 4pi; empty cells are "bald".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DegenerateInputError, EmptySeriesError, SampleSeries


@dataclass(frozen=True)
class CoverageGrid:
    """Angular binning grid; cell size ``dtheta * dphi`` must not exceed ``threshold``."""

    n_theta: int = 500
    n_phi: int = 400
    threshold: float = 1e-4

    def __post_init__(self):
        if self.n_theta < 1 or self.n_phi < 1:
            raise ValueError("grid needs at least one cell per axis")
        if self.dtheta * self.dphi > self.threshold:
            raise ValueError(
                f"cell size {self.dtheta * self.dphi:.3g} exceeds threshold {self.threshold}"
            )

    @property
    def dtheta(self) -> float:
        return 2.0 * math.pi / self.n_theta

    @property
    def dphi(self) -> float:
        return math.pi / self.n_phi

    def cell_areas(self) -> np.ndarray:
        """Solid angle of each row of cells, shape ``(n_phi,)``."""
        edges = np.arange(self.n_phi + 1) * self.dphi
        return self.dtheta * (np.cos(edges[:-1]) - np.cos(edges[1:]))

    def cell_index(self, directions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        norm = np.linalg.norm(directions, axis=1)
        zero = np.flatnonzero(norm == 0)
        if zero.size:
            raise DegenerateInputError(f"zero-vector sample at index {zero[0]}")
        theta = np.mod(np.arctan2(directions[:, 1], directions[:, 0]), 2.0 * math.pi)
        phi = np.arccos(np.clip(directions[:, 2] / norm, -1.0, 1.0))
        i_theta = np.minimum((theta / self.dtheta).astype(np.int64), self.n_theta - 1)
        i_phi = np.minimum((phi / self.dphi).astype(np.int64), self.n_phi - 1)
        return i_theta, i_phi

    def occupancy(self, directions: np.ndarray) -> np.ndarray:
        """Sample counts per cell, shape ``(n_theta, n_phi)``."""
        i_theta, i_phi = self.cell_index(directions)
        flat = np.bincount(i_theta * self.n_phi + i_phi,
                           minlength=self.n_theta * self.n_phi)
        return flat.reshape(self.n_theta, self.n_phi)


@dataclass(frozen=True, eq=False)
class CoverageReport:
    percent: float
    bald_cells: np.ndarray  # (K, 2) array of (theta, phi) cell centres
    n_samples: int
    grid: CoverageGrid = field(default_factory=CoverageGrid)

    def to_dict(self, include_bald_cells: bool = True) -> dict:
        d = {
            "percent": self.percent,
            "n_samples": self.n_samples,
            "n_bald_cells": int(len(self.bald_cells)),
            "grid": {"n_theta": self.grid.n_theta, "n_phi": self.grid.n_phi,
                     "threshold": self.grid.threshold},
        }
        if include_bald_cells:
            d["bald_cells"] = self.bald_cells.tolist()
        return d


def coverage(series, grid: CoverageGrid | None = None) -> CoverageReport:
    """Solid-angle weighted coverage of the sample directions.

    ``series`` may be a :class:`SampleSeries` or an ``(N, 3)`` array.
    """
    grid = grid or CoverageGrid()
    b = series.b if isinstance(series, SampleSeries) else np.asarray(series, float).reshape(-1, 3)
    if b.shape[0] == 0:
        raise EmptySeriesError("coverage of an empty series")
    occupied = grid.occupancy(b) > 0
    areas = grid.cell_areas()
    percent = float((occupied * areas[None, :]).sum() / (4.0 * math.pi))
    i_t, i_p = np.nonzero(~occupied)
    bald = np.column_stack([(i_t + 0.5) * grid.dtheta, (i_p + 0.5) * grid.dphi])
    if bald.shape[0] == 0:
        percent = 1.0
    return CoverageReport(min(percent, 1.0), bald, int(b.shape[0]), grid)
