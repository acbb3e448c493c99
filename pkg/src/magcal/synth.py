"""Synthetic magnetometer data: sphere directions, sensor distortion and noise."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .core import SampleSeries

DEFAULT_FIELD = 45_000.0
GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
MODES = ("uniform_full", "uniform_cap", "trajectory")


def soft_iron_from_angles(v12: float, v13: float, v23: float, scales=(1.0, 1.0, 1.0)) -> np.ndarray:
    """Lower-triangular non-orthogonality matrix with per-axis gains.

    Row ``i`` is the unit sensing direction of axis ``i`` expressed in an
    orthogonal frame, multiplied by that axis' scale factor. Angles in radians.
    """
    limit = math.radians(10.0)
    for name, a in (("v12", v12), ("v13", v13), ("v23", v23)):
        if not abs(a) < limit:
            raise ValueError(f"{name}={a} rad outside the +/-10 degree model range")
    s = np.asarray(scales, dtype=float).reshape(3)
    if np.any(s <= 0):
        raise ValueError(f"scales must be positive, got {s}")
    rad = 1.0 - math.sin(v13) ** 2 - (math.sin(v23) * math.cos(v13)) ** 2
    if rad <= 0:
        raise ValueError("angle combination leaves no valid third axis")
    n = np.array([
        [1.0, 0.0, 0.0],
        [math.sin(v12), math.cos(v12), 0.0],
        [math.sin(v13), math.sin(v23) * math.cos(v13), math.sqrt(rad)],
    ])
    return s[:, None] * n


@dataclass(frozen=True, eq=False)
class DistortionTruth:
    soft_iron: np.ndarray
    hard_iron: np.ndarray
    noise_sigma: float = 0.0
    field: float = DEFAULT_FIELD

    def __post_init__(self):
        a = np.asarray(self.soft_iron, dtype=float).reshape(3, 3)
        o = np.asarray(self.hard_iron, dtype=float).reshape(3)
        if abs(np.linalg.det(a)) < 1e-12:
            raise ValueError("soft-iron matrix is singular")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if not self.field > 0:
            raise ValueError("field must be positive")
        object.__setattr__(self, "soft_iron", a)
        object.__setattr__(self, "hard_iron", o)

    @classmethod
    def from_angles(cls, v12=0.0, v13=0.0, v23=0.0, scales=(1.0, 1.0, 1.0),
                    hard_iron=(0.0, 0.0, 0.0), noise_sigma=0.0, field=DEFAULT_FIELD):
        return cls(soft_iron_from_angles(v12, v13, v23, scales), hard_iron, noise_sigma, field)

    def with_noise(self, sigma: float) -> "DistortionTruth":
        return DistortionTruth(self.soft_iron, self.hard_iron, sigma, self.field)

    def to_dict(self) -> dict:
        return {
            "soft_iron": self.soft_iron.tolist(),
            "hard_iron": self.hard_iron.tolist(),
            "noise_sigma": float(self.noise_sigma),
            "field": float(self.field),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DistortionTruth":
        return cls(d["soft_iron"], d["hard_iron"], d["noise_sigma"], d["field"])


def random_truth(rng: np.random.Generator, max_angle_deg=1.0, max_scale_err=0.005,
                 max_offset=10.0, noise_sigma=0.0, field=DEFAULT_FIELD) -> DistortionTruth:
    """Draw a distortion uniformly within the given bounds."""
    angles = np.radians(rng.uniform(-max_angle_deg, max_angle_deg, 3))
    scales = 1.0 + rng.uniform(-max_scale_err, max_scale_err, 3)
    offset = rng.uniform(-max_offset, max_offset, 3)
    return DistortionTruth.from_angles(*angles, scales=scales, hard_iron=offset,
                                       noise_sigma=noise_sigma, field=field)


@dataclass(frozen=True)
class SamplingPlan:
    """How sample directions are laid out.

    ``mode`` is one of ``uniform_full`` (Fibonacci lattice), ``uniform_cap``
    (lattice restricted to a polar cap of area ``fraction``) or
    ``trajectory`` (smooth random rotation at ``rev_rate`` revolutions/s).
    """

    mode: str = "uniform_full"
    n_samples: int = 100_000
    sample_rate: float = 3000.0
    seed: int = 0
    fraction: float = 1.0
    rev_rate: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if not 0 < self.fraction <= 1:
            raise ValueError(f"coverage fraction must be in (0, 1], got {self.fraction}")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        if self.mode == "trajectory" and not self.rev_rate > 0:
            raise ValueError("rev_rate must be positive")

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    def to_dict(self) -> dict:
        return asdict(self)


def fibonacci_cap(n: int, fraction: float = 1.0) -> np.ndarray:
    """Fibonacci lattice on the cap ``z >= 1 - 2 * fraction``.

    Height is uniform in ``z`` (equal-area by Archimedes) and azimuth advances
    by the golden angle.
    """
    i = np.arange(n, dtype=float)
    z = 1.0 - 2.0 * fraction * (i + 0.5) / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = (i * GOLDEN_ANGLE) % (2.0 * math.pi)
    d = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return d / np.linalg.norm(d, axis=1)[:, None]


def _trajectory(plan: SamplingPlan, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(plan.n_samples) / plan.sample_rate
    # spin about the body z axis while the body frame drifts slowly
    psi = 2.0 * math.pi * plan.rev_rate * t
    spin = np.column_stack([np.cos(psi), np.sin(psi), np.zeros_like(psi)])
    n_modes = 4
    freqs = rng.uniform(0.02, 0.2, (n_modes, 3)) * plan.rev_rate
    phases = rng.uniform(0, 2 * math.pi, (n_modes, 3))
    amps = rng.uniform(0.3, 1.0, (n_modes, 3)) * (math.pi / n_modes)
    rotvec = np.zeros((plan.n_samples, 3))
    for k in range(n_modes):
        rotvec += amps[k] * np.sin(2 * math.pi * freqs[k] * t[:, None] + phases[k])
    d = Rotation.from_rotvec(rotvec).apply(spin)
    return d / np.linalg.norm(d, axis=1)[:, None]


def _streams(seed: int):
    noise_ss, path_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(noise_ss), np.random.default_rng(path_ss)


def sample_directions(plan: SamplingPlan) -> np.ndarray:
    """Unit direction vectors, shape ``(n_samples, 3)``."""
    if plan.mode == "uniform_full":
        return fibonacci_cap(plan.n_samples, 1.0)
    if plan.mode == "uniform_cap":
        return fibonacci_cap(plan.n_samples, plan.fraction)
    return _trajectory(plan, _streams(plan.seed)[1])


def generate(truth: DistortionTruth, plan: SamplingPlan) -> tuple[SampleSeries, SampleSeries]:
    """Return ``(raw, ideal)`` series.

    ``ideal = field * d`` and ``raw = soft_iron @ ideal + hard_iron + noise``,
    noise iid Gaussian per component. Noise for sample ``i`` depends only on
    the seed and ``i``.
    """
    d = sample_directions(plan)
    ideal = truth.field * d
    raw = ideal @ truth.soft_iron.T + truth.hard_iron
    if truth.noise_sigma > 0:
        noise_rng, _ = _streams(plan.seed)
        raw = raw + truth.noise_sigma * noise_rng.standard_normal((plan.n_samples, 3))
    label = f"{plan.mode}:seed={plan.seed}"
    return (SampleSeries.from_samples(raw, plan.sample_rate, label="raw " + label),
            SampleSeries.from_samples(ideal, plan.sample_rate, label="ideal " + label))
