"""Dense linear algebra kernels: Householder QR, Cholesky and triangular solves.

Matrices and vectors are plain ``float64`` numpy arrays. The QR factorization
keeps its reflectors in compact form so that a factored matrix can be
re-solved against many right-hand sides without refactorizing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RANK_RTOL = 1e-10


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class RankDeficientError(np.linalg.LinAlgError):
    """A triangular factor has a (numerically) zero diagonal entry."""

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"matrix is rank deficient at column {column}")


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky hit a non-positive pivot."""

    def __init__(self, pivot):
        self.pivot = pivot
        super().__init__(f"matrix is not positive definite (pivot {pivot})")


def as_matrix(m, name="matrix"):
    m = np.array(m, dtype=float, ndmin=2)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(v, name="vector"):
    v = np.array(v, dtype=float, ndmin=1)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def matvec(m, v):
    """Return ``m @ v`` after checking that the shapes agree."""
    m = as_matrix(m)
    v = as_vector(v)
    if m.shape[1] != v.shape[0]:
        raise DimensionError(
            f"cannot multiply {m.shape[0]}x{m.shape[1]} matrix by vector of length {v.shape[0]}"
        )
    return m @ v


@dataclass(frozen=True)
class QRFactors:
    """Compact Householder QR factorization ``M = Q R``.

    Attributes
    ----------
    householder_vectors : ndarray, shape (k, rows)
        Unit reflector vectors ``v_i``; reflection ``i`` is ``I - 2 v_i v_i^T``
        and ``Q = H_0 H_1 ... H_{k-1}``. A zero row is an identity reflection.
    r_upper : ndarray, shape (rows, cols)
        Upper trapezoidal factor with exact zeros below the diagonal.
    original_shape : tuple of int
    """

    householder_vectors: np.ndarray
    r_upper: np.ndarray
    original_shape: tuple

    def apply_qt(self, y):
        """Return ``Q^T y`` for a vector or a matrix with ``rows`` rows."""
        y = np.array(y, dtype=float)
        for v in self.householder_vectors:
            y -= 2.0 * np.outer(v, v @ y) if y.ndim == 2 else 2.0 * v * (v @ y)
        return y

    def apply_q(self, y):
        """Return ``Q y``."""
        y = np.array(y, dtype=float)
        for v in self.householder_vectors[::-1]:
            y -= 2.0 * np.outer(v, v @ y) if y.ndim == 2 else 2.0 * v * (v @ y)
        return y

    def q_matrix(self):
        """Materialize the full orthogonal factor, shape (rows, rows)."""
        return self.apply_q(np.eye(self.original_shape[0]))

    def reconstruct(self):
        return self.apply_q(self.r_upper)


def householder_qr(m):
    """Factor ``m`` with Householder reflections.

    Works for tall, square and wide matrices; for ``rows < cols`` the
    returned ``R`` is trapezoidal. Rank deficiency is not detected here.
    """
    r = as_matrix(m).copy()
    rows, cols = r.shape
    if rows < 1 or cols < 1:
        raise DimensionError("cannot factor an empty matrix")
    k = min(rows - 1, cols)
    vectors = np.zeros((max(k, 0), rows))
    for j in range(k):
        x = r[j:, j]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        alpha = -norm_x if x[0] >= 0 else norm_x
        v = x.copy()
        v[0] -= alpha
        v_norm = np.linalg.norm(v)
        if v_norm == 0.0:
            continue
        v /= v_norm
        r[j:, j:] -= 2.0 * np.outer(v, v @ r[j:, j:])
        r[j, j] = alpha
        r[j + 1 :, j] = 0.0
        vectors[j, j:] = v
    return QRFactors(vectors, np.triu(r), (rows, cols))


def back_substitution(r, y, rtol=RANK_RTOL):
    """Solve ``r x = y`` for square upper-triangular ``r``.

    Raises
    ------
    RankDeficientError
        If ``|r[j, j]| <= rtol * max_k |r[k, k]|``.
    """
    n = r.shape[0]
    diag = np.abs(np.diag(r))
    threshold = rtol * (diag.max() if n else 0.0)
    x = np.zeros(n)
    for j in range(n - 1, -1, -1):
        if diag[j] <= threshold or diag[j] == 0.0:
            raise RankDeficientError(j)
        x[j] = (y[j] - r[j, j + 1 :] @ x[j + 1 :]) / r[j, j]
    return x


def forward_substitution(lower, y, rtol=RANK_RTOL):
    """Solve ``lower x = y`` for square lower-triangular ``lower``."""
    n = lower.shape[0]
    diag = np.abs(np.diag(lower))
    threshold = rtol * (diag.max() if n else 0.0)
    x = np.zeros(n)
    for j in range(n):
        if diag[j] <= threshold or diag[j] == 0.0:
            raise RankDeficientError(j)
        x[j] = (y[j] - lower[j, :j] @ x[:j]) / lower[j, j]
    return x


def solve_ls(f, rhs):
    """Least-squares solve ``min ||rhs - M x||`` from the factors of ``M``.

    Raises
    ------
    DimensionError
        If ``rhs`` does not have ``rows`` entries.
    RankDeficientError
        If ``M`` does not have full column rank.
    """
    rhs = as_vector(rhs, "rhs")
    rows, cols = f.original_shape
    if rhs.shape[0] != rows:
        raise DimensionError(f"rhs has length {rhs.shape[0]}, expected {rows}")
    if rows < cols:
        raise RankDeficientError(rows, f"wide {rows}x{cols} system has no unique solution")
    qtb = f.apply_qt(rhs)
    return back_substitution(f.r_upper[:cols, :cols], qtb[:cols])


def solve_shifted_normal(f, rhs, shift):
    """Solve ``(M^T M) x = M^T rhs - shift`` using the QR factors of ``M``.

    With ``M^T M = R^T R`` this is ``R x = Q_1^T rhs - R^{-T} shift``.
    """
    rows, cols = f.original_shape
    r = f.r_upper[:cols, :cols]
    qtb = f.apply_qt(as_vector(rhs, "rhs"))[:cols]
    y = forward_substitution(r.T, as_vector(shift, "shift"))
    return back_substitution(r, qtb - y)


def cholesky(m):
    """Lower-triangular ``L`` with ``L L^T = m`` for symmetric positive definite ``m``."""
    m = as_matrix(m)
    n = m.shape[0]
    if m.shape[1] != n:
        raise DimensionError("cholesky needs a square matrix")
    if not np.allclose(m, m.T, rtol=1e-12, atol=1e-14):
        raise ValueError("cholesky needs a symmetric matrix")
    lower = np.zeros_like(m)
    for j in range(n):
        pivot = m[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot <= 0.0:
            raise NotPositiveDefiniteError(j)
        lower[j, j] = np.sqrt(pivot)
        for i in range(j + 1, n):
            lower[i, j] = (m[i, j] - lower[i, :j] @ lower[j, :j]) / lower[j, j]
    return lower
