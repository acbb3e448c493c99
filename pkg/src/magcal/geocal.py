"""Geometric calibration: ellipsoid fit -> affine correction h_c = M (h_r - b)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .core import EmptySeriesError, MetricReport, SampleSeries, metric_report
from .ellipsoid import DegenerateGeometryError, EllipsoidParams, extract_ellipsoid, fit_quadric

PROVENANCES = ("geometric", "neural", "external")


@dataclass(frozen=True, eq=False)
class CalibrationModel:
    """Affine correction applied as ``matrix @ (b - offset)``.

    ``target_field`` is the radius (nT) of the sphere the model maps onto.
    """

    matrix: np.ndarray
    offset: np.ndarray
    target_field: float
    provenance: str = "external"
    created_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds")
    )

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).reshape(3, 3)
        o = np.asarray(self.offset, dtype=float).reshape(3)
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(o))):
            raise ValueError("non-finite calibration parameters")
        if abs(np.linalg.det(m)) <= 1e-12:
            raise ValueError("calibration matrix is singular")
        if not self.target_field > 0:
            raise ValueError(f"target_field must be positive, got {self.target_field}")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", o)
        object.__setattr__(self, "target_field", float(self.target_field))

    @classmethod
    def identity(cls, target_field: float, provenance: str = "external"):
        return cls(np.eye(3), np.zeros(3), target_field, provenance)

    def to_dict(self) -> dict:
        return {
            "matrix": [float(x) for x in self.matrix.reshape(9)],
            "offset": [float(x) for x in self.offset],
            "target_field": self.target_field,
            "provenance": self.provenance,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CalibrationModel":
        missing = {"matrix", "offset", "target_field", "provenance"} - set(d)
        if missing:
            raise ValueError(f"calibration model missing fields: {sorted(missing)}")
        if len(d["matrix"]) != 9 or len(d["offset"]) != 3:
            raise ValueError("matrix needs 9 numbers (row-major) and offset 3")
        kw = {}
        if "created_at" in d:
            kw["created_at"] = str(d["created_at"])
        return cls(np.reshape(d["matrix"], (3, 3)), d["offset"],
                   d["target_field"], d["provenance"], **kw)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "CalibrationModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def estimate_field_magnitude(series: SampleSeries) -> float:
    """Median sample magnitude; used as the sphere radius to calibrate onto."""
    if len(series) == 0:
        raise EmptySeriesError("cannot estimate the field from an empty series")
    return float(np.median(series.magnitudes()))


def build_correction(e: EllipsoidParams, target_field: float) -> CalibrationModel:
    """Correction mapping the ellipsoid ``e`` onto a sphere of ``target_field``.

    Uses the symmetric form ``R diag(B/a, B/b, B/c) R^T`` so corrected vectors
    stay close to the sensor frame.
    """
    if not target_field > 0:
        raise ValueError(f"target_field must be positive, got {target_field}")
    if np.any(e.semi_axes <= 0):
        raise DegenerateGeometryError(f"degenerate semi-axes {e.semi_axes}")
    r = e.rotation
    m = r @ np.diag(target_field / e.semi_axes) @ r.T
    return CalibrationModel(m, e.center, target_field, "geometric")


def apply(model: CalibrationModel, series: SampleSeries) -> SampleSeries:
    out = (series.b - model.offset) @ model.matrix.T
    return series.with_samples(out)


def calibrate_geometric(raw: SampleSeries, target_field: float | None = None
                        ) -> tuple[CalibrationModel, MetricReport]:
    """Fit, extract, build and evaluate in one call.

    ``target_field`` defaults to the median raw magnitude.
    """
    e = extract_ellipsoid(fit_quadric(raw))
    if target_field is None:
        target_field = estimate_field_magnitude(raw)
    model = build_correction(e, target_field)
    return model, metric_report(apply(model, raw))
