"""Hyperspherical coordinates and the distances used by particle weighting.

Direction is what matters for word vectors (magnitude mostly tracks
frequency), so points are compared as angles on the unit (d-1)-sphere.
A vector in R^d maps to d-1 angles: polar angles measured successively
from the last axis down (each in [0, pi]) followed by the azimuth in the
x1-x2 plane (in [0, 2pi)).  Only the azimuth axis is periodic.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


class ZeroVectorError(ValueError):
    """Direction of the zero vector is undefined."""


class DiagonalGaussian:
    """Axis-aligned Gaussian over angle coordinates."""

    __slots__ = ("mean", "variance")

    def __init__(self, mean, variance):
        self.mean = np.asarray(mean, dtype=float)        # shape (d-1,), angles
        self.variance = np.asarray(variance, dtype=float)  # radians^2, > 0
        if self.mean.shape != self.variance.shape:
            raise ValueError("mean/variance shape mismatch")
        if not np.all(self.variance > 0) or not np.all(np.isfinite(self.variance)):
            raise ValueError("variance components must be positive and finite")

    def copy(self):
        return _gaussian_unchecked(self.mean.copy(), self.variance.copy())

    def __eq__(self, other):
        return (
            isinstance(other, DiagonalGaussian)
            and np.array_equal(self.mean, other.mean)
            and np.array_equal(self.variance, other.variance)
        )

    def __repr__(self):
        return f"DiagonalGaussian(mean={self.mean!r}, variance={self.variance!r})"


def _gaussian_unchecked(mean: np.ndarray, variance: np.ndarray) -> DiagonalGaussian:
    # hot-path constructor: inputs already validated arrays
    g = DiagonalGaussian.__new__(DiagonalGaussian)
    g.mean = mean
    g.variance = variance
    return g


def to_nsphere(v: np.ndarray) -> np.ndarray:
    """Angle coordinates of v's direction; the radius is discarded.

    Degenerate angles at a pole (leading coordinate block all zero) are
    fixed at 0, so the transform is deterministic everywhere.
    Scale-invariant: to_nsphere(c * v) == to_nsphere(v) for c > 0.
    """
    v = np.asarray(v, dtype=float)
    if v.size < 2:
        raise ValueError("need dimension >= 2")
    if not np.any(v != 0.0):
        raise ZeroVectorError("zero vector has no direction")
    # delegate to the batch path so scalar and batched results are
    # bit-identical (strided vs contiguous ufunc loops can differ by ULPs)
    return to_nsphere_batch(v[np.newaxis, :])[0]


def to_nsphere_batch(V: np.ndarray) -> np.ndarray:
    """Row-wise to_nsphere for an (n, d) matrix; rows must be nonzero."""
    V = np.asarray(V, dtype=float)
    n, d = V.shape
    if d < 2:
        raise ValueError("need dimension >= 2")
    angles = np.empty((n, d - 1))
    # polar angle k is measured from axis d-1-k against the norm of the
    # remaining leading block v[:d-1-k]
    prefix_sq = np.cumsum(V * V, axis=1)
    if d > 2:
        angles[:, : d - 2] = np.arctan2(
            np.sqrt(prefix_sq[:, d - 2 : 0 : -1]), V[:, d - 1 : 1 : -1]
        )
    azimuth = np.arctan2(V[:, 1], V[:, 0])
    azimuth[azimuth < 0.0] += TWO_PI
    angles[:, d - 2] = azimuth
    return angles


def from_nsphere(angles: np.ndarray) -> np.ndarray:
    """Unit vector whose to_nsphere image is ``angles`` (inverse transform)."""
    angles = np.asarray(angles, dtype=float)
    d = angles.size + 1
    v = np.empty(d)
    radius = 1.0
    for k in range(d - 2):
        v[d - 1 - k] = radius * np.cos(angles[k])
        radius = radius * np.sin(angles[k])
    v[0] = radius * np.cos(angles[d - 2])
    v[1] = radius * np.sin(angles[d - 2])
    return v


def wrap_to_pi(x: float) -> float:
    """Map an angle difference into (-pi, pi]."""
    w = np.remainder(x, TWO_PI)
    if w > np.pi:
        w -= TWO_PI
    return w


def angle_diff(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Componentwise a - b with the periodic azimuth wrapped into (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    diff = a - b
    diff[-1] = wrap_to_pi(diff[-1])
    return diff


def mahalanobis(g: DiagonalGaussian, x: np.ndarray) -> float:
    """sqrt(sum(diff_i^2 / var_i)) with the wrapped angle difference."""
    diff = g.mean - x
    w = diff[-1] % TWO_PI
    if w > np.pi:
        w -= TWO_PI
    diff[-1] = w
    return float(np.sqrt(np.sum(diff * diff / g.variance)))


def kl_divergence(p: DiagonalGaussian, q: DiagonalGaussian) -> float:
    """Closed-form KL(p || q) for diagonal Gaussians on angle coordinates.

    Mean differences are wrapped on the azimuth axis, which makes this an
    approximation to the wrapped-normal divergence; exact away from the
    wrap seam.
    """
    if p.mean.shape != q.mean.shape:
        raise ValueError("dimension mismatch")
    diff = angle_diff(p.mean, q.mean)
    terms = (
        p.variance / q.variance
        + diff * diff / q.variance
        - 1.0
        + np.log(q.variance / p.variance)
    )
    return float(0.5 * np.sum(terms))


def gaussian_noise(std: float, dim: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. zero-mean normal vector; std == 0 draws nothing and returns zeros."""
    if std < 0:
        raise ValueError("std must be nonnegative")
    if std == 0.0:
        return np.zeros(dim)
    return rng.normal(0.0, std, size=dim)
