import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_rotation, series_of
from magcal.core import DegenerateInputError
from magcal.project import TrainingPairs, build_training_pairs, project_points, project_to_sphere

B = 45_000.0


def grid_argmin(p, field, n_theta=2000, n_phi=1000):
    """Brute-force minimiser of |q - p|^2 over a (theta, phi) grid on the sphere."""
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    phi = np.pi * (np.arange(n_phi) + 0.5) / n_phi
    st_, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    q = field * np.stack([np.outer(sp, ct), np.outer(sp, st_),
                          np.broadcast_to(cp[:, None], (n_phi, n_theta))], axis=-1)
    j = np.sum((q - p) ** 2, axis=-1)
    k = np.unravel_index(np.argmin(j), j.shape)
    return q[k], j[k]


def test_radial_and_fixed_point():
    np.testing.assert_allclose(project_to_sphere((2 * B, 0, 0), B), (B, 0, 0))
    p = np.array([3.0, 4.0, 12.0]) / 13.0 * B
    np.testing.assert_allclose(project_to_sphere(p, B), p, rtol=1e-15)


def test_zero_vector_rejected():
    with pytest.raises(DegenerateInputError):
        project_to_sphere((0, 0, 0), B)
    with pytest.raises(DegenerateInputError, match="index 1"):
        build_training_pairs(series_of([[1, 0, 0], [0, 0, 0]]), B)


def test_matches_grid_search(rng):
    for _ in range(3):
        p = rng.normal(0, 1, 3) * rng.uniform(0.5, 2.0) * B
        q = project_to_sphere(p, B)
        qg, jg = grid_argmin(p, B)
        angle = np.arccos(np.clip(q @ qg / B ** 2, -1, 1))
        assert angle < 2 * np.pi / 2000
        assert np.sum((q - p) ** 2) <= jg * (1 + 1e-12)


def test_beats_random_sphere_points(rng):
    for _ in range(20):
        p = rng.normal(0, B, 3)
        j = np.sum((project_to_sphere(p, B) - p) ** 2)
        u = rng.standard_normal((10_000, 3))
        u = B * u / np.linalg.norm(u, axis=1)[:, None]
        assert j <= np.min(np.sum((u - p) ** 2, axis=1))


nonzero = arrays(float, 3, elements=st.floats(-1e5, 1e5)).filter(lambda v: np.linalg.norm(v) > 1e-3)


@given(nonzero)
def test_idempotent(p):
    q = project_to_sphere(p, B)
    np.testing.assert_allclose(project_to_sphere(q, B), q, rtol=1e-12)


@settings(max_examples=50)
@given(nonzero, st.integers(0, 2**32 - 1))
def test_rotation_equivariant(p, seed):
    r = random_rotation(np.random.default_rng(seed))
    np.testing.assert_allclose(project_to_sphere(r @ p, B), r @ project_to_sphere(p, B),
                               rtol=1e-9, atol=1e-9 * B)


def test_training_pairs(rng):
    on_sphere = series_of(project_points(rng.normal(0, 1, (50, 3)), B))
    pairs = build_training_pairs(on_sphere, B)
    np.testing.assert_allclose(pairs.targets.b, pairs.inputs.b, rtol=1e-12)
    pairs = build_training_pairs(series_of([[2 * B, 0, 0]]), B)
    np.testing.assert_allclose(pairs.targets.b, [[B, 0, 0]])
    raw = series_of(rng.normal(0, B, (100, 3)))
    pairs = build_training_pairs(raw, B)
    assert len(pairs) == 100
    np.testing.assert_array_equal(pairs.inputs.t, pairs.targets.t)
    np.testing.assert_allclose(np.linalg.norm(pairs.targets.b, axis=1), B, rtol=1e-9)


def test_pairs_validation(rng):
    a = series_of(rng.normal(0, 1, (5, 3)))
    with pytest.raises(ValueError):
        TrainingPairs(a, series_of(rng.normal(0, 1, (4, 3))), 1.0)
    with pytest.raises(ValueError):
        build_training_pairs(a, 0.0)
