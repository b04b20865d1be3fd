"""Dense-matrix math kernels used throughout the toolkit.

Matrices are 2-D float64 numpy arrays (row-major), vectors are 1-D float64
arrays. All functions are pure and never mutate their inputs, so they are
safe to call concurrently.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateBatch, ShapeError, ZeroNorm


def as_matrix(x) -> np.ndarray:
    m = np.asarray(x, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {m.shape}")
    return m


def as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {v.shape}")
    return v


def covariance(x) -> np.ndarray:
    """Unbiased covariance (1/(n-1)) of the rows of an n-by-d matrix.

    Columns are mean-centered first; the result is symmetric positive
    semidefinite. Requires at least two rows.
    """
    m = as_matrix(x)
    n = m.shape[0]
    if n < 2:
        raise DegenerateBatch(f"covariance needs >= 2 rows, got {n}")
    centered = m - m.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    # enforce exact symmetry against rounding
    return (cov + cov.T) / 2.0


def frobenius_sq(x) -> float:
    """Sum of squared entries."""
    m = as_matrix(x)
    return float(np.sum(m * m))


def cosine(u, v) -> float:
    """Cosine similarity, clamped to [-1, 1]. Zero-norm inputs are an error."""
    a = as_vector(u)
    b = as_vector(v)
    if a.shape != b.shape:
        raise ShapeError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroNorm("cosine similarity undefined for zero-norm vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def softmax(scores) -> np.ndarray:
    """Softmax with max-subtraction for overflow safety."""
    s = as_vector(scores)
    if s.shape[0] < 1:
        raise ShapeError("softmax needs at least one score")
    shifted = s - s.max()
    e = np.exp(shifted)
    return e / e.sum()


def matmul(a, b) -> np.ndarray:
    ma = as_matrix(a)
    mb = as_matrix(b)
    if ma.shape[1] != mb.shape[0]:
        raise ShapeError(f"inner dims differ: {ma.shape} x {mb.shape}")
    return ma @ mb


def transpose(a) -> np.ndarray:
    return as_matrix(a).T.copy()


def column_means(a) -> np.ndarray:
    return as_matrix(a).mean(axis=0)


def add_scaled(a, b, alpha: float = 1.0) -> np.ndarray:
    """a + alpha * b for same-shape matrices."""
    ma = as_matrix(a)
    mb = as_matrix(b)
    if ma.shape != mb.shape:
        raise ShapeError(f"shape mismatch: {ma.shape} vs {mb.shape}")
    return ma + alpha * mb
