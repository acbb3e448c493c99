"""Training targets for the network: nearest point on the field sphere.

The closest point to ``p`` on the origin-centred sphere of radius ``B`` is
the radial projection ``B p / |p|``; no iterative solver is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DegenerateInputError, SampleSeries, as_vec3


@dataclass(frozen=True, eq=False)
class TrainingPairs:
    inputs: SampleSeries
    targets: SampleSeries
    field: float

    def __post_init__(self):
        if len(self.inputs) != len(self.targets):
            raise ValueError("inputs and targets differ in length")
        if not np.array_equal(self.inputs.t, self.targets.t):
            raise ValueError("inputs and targets have different timestamps")
        if not self.field > 0:
            raise ValueError(f"field must be positive, got {self.field}")

    def __len__(self) -> int:
        return len(self.inputs)


def project_to_sphere(p, field: float) -> np.ndarray:
    p = as_vec3(p)
    if not field > 0:
        raise ValueError(f"field must be positive, got {field}")
    n = np.linalg.norm(p)
    if n == 0:
        raise DegenerateInputError("zero vector has no unique nearest sphere point")
    return field * p / n


def project_points(points: np.ndarray, field: float) -> np.ndarray:
    """Vectorised radial projection of an ``(N, 3)`` array."""
    n = np.linalg.norm(points, axis=1)
    zero = np.flatnonzero(n == 0)
    if zero.size:
        raise DegenerateInputError(f"zero-vector sample at index {zero[0]}")
    return field * points / n[:, None]


def build_training_pairs(raw: SampleSeries, field: float) -> TrainingPairs:
    if not field > 0:
        raise ValueError(f"field must be positive, got {field}")
    targets = raw.with_samples(project_points(raw.b, field))
    return TrainingPairs(raw, targets, float(field))
