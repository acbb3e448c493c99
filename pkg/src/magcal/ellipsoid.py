"""Algebraic least-squares ellipsoid fitting.

The quadric is written as::

    A x^2 + B y^2 + C z^2 + 2D xy + 2E xz + 2F yz + 2G x + 2H y + 2I z = 1

and fitted by linear least squares on the 9-column design matrix. The
ellipsoid is then recovered as center, descending semi-axes and a proper
rotation whose columns are the principal axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SampleSeries


class DegenerateGeometryError(ValueError):
    """Points do not determine (or do not bound) an ellipsoid."""


RANK_RTOL = 1e-10


@dataclass(frozen=True)
class QuadricCoefficients:
    A: float
    B: float
    C: float
    D: float
    E: float
    F: float
    G: float
    H: float
    I: float

    @classmethod
    def from_vector(cls, v) -> "QuadricCoefficients":
        return cls(*(float(x) for x in np.asarray(v).reshape(9)))

    def as_vector(self) -> np.ndarray:
        return np.array([self.A, self.B, self.C, self.D, self.E,
                         self.F, self.G, self.H, self.I])

    def quadratic(self) -> np.ndarray:
        return np.array([[self.A, self.D, self.E],
                         [self.D, self.B, self.F],
                         [self.E, self.F, self.C]])

    def linear(self) -> np.ndarray:
        return np.array([self.G, self.H, self.I])

    def residuals(self, points) -> np.ndarray:
        """Algebraic residual ``p^T Q p + 2 g^T p - 1`` for each point."""
        p = _as_points(points)
        return design_matrix(p) @ self.as_vector() - 1.0


@dataclass(frozen=True, eq=False)
class EllipsoidParams:
    """Center (nT), semi-axes (nT, descending) and principal-axis rotation."""

    center: np.ndarray
    semi_axes: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(3)
        ax = np.asarray(self.semi_axes, dtype=float).reshape(3)
        r = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        if np.any(ax <= 0):
            raise DegenerateGeometryError(f"semi-axes must be positive, got {ax}")
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-9):
            raise ValueError("rotation is not orthogonal")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValueError("rotation is not proper (det != +1)")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "semi_axes", ax)
        object.__setattr__(self, "rotation", r)

    def shape_matrix(self) -> np.ndarray:
        """``R diag(1/a^2, 1/b^2, 1/c^2) R^T``; surface is ``y^T Q y = 1``."""
        r = self.rotation
        return r @ np.diag(self.semi_axes ** -2.0) @ r.T

    def surface_points(self, directions) -> np.ndarray:
        """Map unit vectors onto the ellipsoid surface (center + R S u)."""
        u = np.asarray(directions, dtype=float).reshape(-1, 3)
        return self.center + (u * self.semi_axes) @ self.rotation.T

    def to_quadric(self) -> QuadricCoefficients:
        """Forward map into the ``= 1`` normalised quadric."""
        q = self.shape_matrix()
        c = self.center
        k = 1.0 - c @ q @ c
        if k == 0:
            raise DegenerateGeometryError("ellipsoid passes through the origin")
        qn = q / k
        g = -(q @ c) / k
        return QuadricCoefficients(qn[0, 0], qn[1, 1], qn[2, 2], qn[0, 1],
                                   qn[0, 2], qn[1, 2], g[0], g[1], g[2])


def _as_points(points) -> np.ndarray:
    if isinstance(points, SampleSeries):
        return points.b
    return np.asarray(points, dtype=float).reshape(-1, 3)


def design_matrix(p: np.ndarray) -> np.ndarray:
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    return np.column_stack([x * x, y * y, z * z,
                            2 * x * y, 2 * x * z, 2 * y * z,
                            2 * x, 2 * y, 2 * z])


def fit_quadric(points) -> QuadricCoefficients:
    """Least-squares quadric through ``points`` (SampleSeries or (N, 3) array).

    Points are rescaled to unit RMS norm before the solve; the coefficients
    are mapped back afterwards, so the result is in the input units.
    """
    p = _as_points(points)
    if p.shape[0] < 9:
        raise DegenerateGeometryError(f"need at least 9 points, got {p.shape[0]}")
    scale = float(np.sqrt(np.mean(np.sum(p * p, axis=1))))
    if scale == 0:
        raise DegenerateGeometryError("all points at the origin")
    d = design_matrix(p / scale)
    # column equilibration, then an orthogonal-factorisation solve
    col = np.linalg.norm(d, axis=0)
    if np.any(col == 0):
        raise DegenerateGeometryError("design matrix has an all-zero column")
    sol, _, rank, sv = np.linalg.lstsq(d / col, np.ones(d.shape[0]), rcond=None)
    if sv[-1] < RANK_RTOL * sv[0]:
        raise DegenerateGeometryError(
            "rank-deficient design matrix (points do not constrain a quadric)"
        )
    v = sol / col
    v[:6] /= scale ** 2
    v[6:] /= scale
    q = QuadricCoefficients.from_vector(v)
    _center_and_scale(q)  # raises unless the quadric is an ellipsoid
    return q


def _center_and_scale(q: QuadricCoefficients):
    qm = q.quadratic()
    g = q.linear()
    try:
        center = -np.linalg.solve(qm, g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateGeometryError("singular quadratic form") from exc
    # translating to the center leaves y^T Q y = 1 - g.c
    s = 1.0 - g @ center
    if s == 0:
        raise DegenerateGeometryError("quadric degenerates to a point")
    evals = np.linalg.eigvalsh(qm / s)
    if np.any(evals <= 0):
        raise DegenerateGeometryError(
            f"quadric is not an ellipsoid (eigenvalues {evals})"
        )
    return center, s


def canonical_rotation(vecs: np.ndarray) -> np.ndarray:
    """Sign-fix eigenvector columns: largest |entry| positive, det = +1."""
    r = np.array(vecs, dtype=float)
    for j in range(3):
        i = np.argmax(np.abs(r[:, j]))
        if r[i, j] < 0:
            r[:, j] = -r[:, j]
    if np.linalg.det(r) < 0:
        r[:, 2] = -r[:, 2]
    return r


def extract_ellipsoid(q: QuadricCoefficients) -> EllipsoidParams:
    center, s = _center_and_scale(q)
    evals, evecs = np.linalg.eigh(q.quadratic() / s)
    # eigh sorts ascending, so semi-axes come out descending
    return EllipsoidParams(center=center, semi_axes=1.0 / np.sqrt(evals),
                           rotation=canonical_rotation(evecs))


def fit_ellipsoid(points) -> EllipsoidParams:
    return extract_ellipsoid(fit_quadric(points))
