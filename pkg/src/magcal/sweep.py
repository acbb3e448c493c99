"""Calibration quality versus sphere coverage and sensor noise.

Each cell trains on a polar-cap lattice of the requested area fraction and
is scored on an independent, noiseless, full-sphere test set drawn with the
same distortion, so the numbers measure how well the correction generalises.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .core import SampleSeries, metric_report
from .coverage import coverage as coverage_of
from .ellipsoid import DegenerateGeometryError
from .geocal import apply, calibrate_geometric
from .nncal import TrainConfig, TrainingDivergedError, calibrate_neural
from .synth import DEFAULT_FIELD, SamplingPlan, generate, random_truth

METHODS = ("geo", "nn")


@dataclass(frozen=True)
class SweepConfig:
    coverages: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    sigmas: tuple = (0.1, 0.3)
    methods: tuple = METHODS
    seeds: tuple = (0, 1, 2, 3, 4)
    n_samples: int = 100_000
    n_test: int = 20_000
    field: float = DEFAULT_FIELD
    max_angle_deg: float = 1.0
    max_scale_err: float = 0.005
    max_offset: float = 10.0
    train: TrainConfig = dc_field(default_factory=lambda: TrainConfig(epochs=60, retarget_every=1))
    measure_coverage: bool = False


def seed_truth(cfg: SweepConfig, seed: int, sigma: float):
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7]))
    return random_truth(rng, cfg.max_angle_deg, cfg.max_scale_err, cfg.max_offset,
                        noise_sigma=sigma, field=cfg.field)


def make_test_set(cfg: SweepConfig, truth, seed: int) -> SampleSeries:
    """Noiseless distorted samples on random uniform directions (fresh stream)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 99]))
    d = rng.standard_normal((cfg.n_test, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    raw = truth.field * d @ truth.soft_iron.T + truth.hard_iron
    return SampleSeries.from_samples(raw, 1.0, label="test")


def run_cell(cfg: SweepConfig, coverage: float, sigma: float, method: str, seed: int) -> dict:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    truth = seed_truth(cfg, seed, sigma)
    plan = SamplingPlan("uniform_cap", cfg.n_samples, seed=seed, fraction=coverage)
    raw, _ = generate(truth, plan)
    row = {"coverage": coverage, "sigma": sigma, "method": method, "seed": seed}
    if cfg.measure_coverage:
        row["achieved_coverage"] = coverage_of(raw).percent
    try:
        if method == "geo":
            model, _ = calibrate_geometric(raw)
        else:
            tc = TrainConfig(**{**cfg.train.__dict__, "seed": seed})
            model, _, _ = calibrate_neural(raw, tc)
        rep = metric_report(apply(model, make_test_set(cfg, truth, seed)))
        row.update(ptp=rep.ptp, variance=rep.variance, status="ok")
    except (ValueError, TrainingDivergedError, np.linalg.LinAlgError) as exc:
        # a cap too small to pin down the ellipsoid is a result, not a crash
        row.update(ptp=math.inf, variance=math.inf, status=f"failed: {exc}")
    return row


def run_sweep(cfg: SweepConfig, progress=None) -> list[dict]:
    rows = []
    for coverage in cfg.coverages:
        for sigma in cfg.sigmas:
            for method in cfg.methods:
                for seed in cfg.seeds:
                    rows.append(run_cell(cfg, coverage, sigma, method, seed))
                    if progress:
                        progress(rows[-1])
    return sorted(rows, key=lambda r: (r["coverage"], r["sigma"], r["method"], r["seed"]))


def summarize(rows: list[dict]) -> list[dict]:
    """Median PTP and variance over seeds for each (coverage, sigma, method)."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["coverage"], r["sigma"], r["method"]), []).append(r)
    out = []
    for key in sorted(groups):
        g = groups[key]
        out.append({
            "coverage": key[0], "sigma": key[1], "method": key[2],
            "ptp": float(np.median([r["ptp"] for r in g])),
            "variance": float(np.median([r["variance"] for r in g])),
            "n_seeds": len(g),
        })
    return out


def count_inversions(values) -> list[float]:
    """Relative increases between consecutive entries of a sequence."""
    v = list(values)
    return [(b - a) / a for a, b in zip(v, v[1:]) if b > a]


def extrapolate_minutes(duration_minutes: float, achieved: float, needed: float) -> float:
    """Rotation time to reach ``needed`` coverage assuming uniform accumulation."""
    if not (achieved > 0 and needed > 0 and duration_minutes > 0):
        raise ValueError("duration and coverages must be positive")
    return duration_minutes * needed / achieved


def write_table(rows: list[dict], path, columns=("coverage", "sigma", "method", "ptp", "variance")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(r[c]) if isinstance(r[c], float) else r[c] for c in columns])
