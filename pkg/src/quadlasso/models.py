"""Problem containers and the model constructions built from them.

Every model shares the same input: a design ``a`` (m x n), a response ``b``
(m,) and a non-negative shrink vector ``lam`` (n,). The builders here turn that
input into the signed decomposition, the row-augmented system, the rank-one
quadratic penalty, the ridge augmentation and the ridge/lasso blend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError, as_matrix, as_vector


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def broadcast_shrink(lam, n):
    """Expand a scalar shrink value to ``n`` columns, or validate a vector."""
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 0:
        lam = np.full(n, float(lam))
    lam = as_vector(lam, "lambda")
    if lam.shape[0] != n:
        raise DimensionError(f"lambda has length {lam.shape[0]}, expected {n}")
    if np.any(lam < 0):
        raise ValueError("lambda must be non-negative")
    return lam


@dataclass(frozen=True)
class Problem:
    """Shared regression input ``(a, b, lam)``. Arrays are stored read-only."""

    a: np.ndarray
    b: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.a, "a")
        b = as_vector(self.b, "b")
        if a.shape[0] != b.shape[0]:
            raise DimensionError(f"a has {a.shape[0]} rows but b has length {b.shape[0]}")
        lam = broadcast_shrink(self.lam, a.shape[1])
        object.__setattr__(self, "a", _frozen(a))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "lam", _frozen(lam))

    @property
    def shape(self):
        return self.a.shape

    def with_lambda(self, lam):
        return Problem(self.a, self.b, lam)


@dataclass(frozen=True)
class AugmentedProblem:
    """Least-squares system ``[a; lam^T] x ~ [b; t]``; the penalty sits in row ``m``."""

    a_tilde: np.ndarray
    b_tilde: np.ndarray
    penalty_row_index: int

    def with_rhs(self, t):
        b = np.array(self.b_tilde)
        b[self.penalty_row_index] = t
        return AugmentedProblem(self.a_tilde, _frozen(b), self.penalty_row_index)


@dataclass(frozen=True)
class PenaltyBlend:
    """Mixture ``(1 - alpha) I + alpha lam lam^T`` of ridge and rank-one penalties."""

    alpha: float
    lam: np.ndarray

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        lam = as_vector(self.lam, "lambda")
        if np.any(lam < 0):
            raise ValueError("lambda must be non-negative")
        object.__setattr__(self, "lam", _frozen(lam))

    def matrix(self):
        n = self.lam.shape[0]
        return (1.0 - self.alpha) * np.eye(n) + self.alpha * np.outer(self.lam, self.lam)


def decompose_signed(p):
    """Split ``x = x+ - x-``: design ``[a, -a]``, shrink ``(lam, lam)``."""
    return Problem(np.hstack([p.a, -p.a]), p.b, np.concatenate([p.lam, p.lam]))


def recompose(x_plus, x_minus):
    x_plus = as_vector(x_plus, "x_plus")
    x_minus = as_vector(x_minus, "x_minus")
    if x_plus.shape != x_minus.shape:
        raise DimensionError("x_plus and x_minus must have equal length")
    return x_plus - x_minus


def split_signed(x_doubled):
    """Inverse view of :func:`decompose_signed` for a stacked ``(x+, x-)`` vector."""
    x_doubled = as_vector(x_doubled)
    n = x_doubled.shape[0] // 2
    return x_doubled[:n], x_doubled[n:]


def build_augmented(p, t=0.0):
    a_tilde = np.vstack([p.a, p.lam[np.newaxis, :]])
    b_tilde = np.append(p.b, float(t))
    return AugmentedProblem(_frozen(a_tilde), _frozen(b_tilde), p.a.shape[0])


def build_quadratic_penalty(lam):
    lam = as_vector(lam, "lambda")
    if np.any(lam < 0):
        raise ValueError("lambda must be non-negative")
    return np.outer(lam, lam)


def build_blend_augmentation(blend):
    """Rows ``[sqrt(1 - alpha) I; sqrt(alpha) lam^T]`` whose Gram matrix is the blend.

    The identity block is dropped at ``alpha = 1`` and the lambda row at
    ``alpha = 0``, so the endpoints reduce to plain ridge and to the single
    penalty row of the augmented model.
    """
    n = blend.lam.shape[0]
    blocks = []
    if blend.alpha < 1.0:
        blocks.append(np.sqrt(1.0 - blend.alpha) * np.eye(n))
    if blend.alpha > 0.0:
        blocks.append(np.sqrt(blend.alpha) * blend.lam[np.newaxis, :])
    return np.vstack(blocks)


def build_ridge_augmented(p):
    """Classical ridge as least squares: design ``[a; sqrt(diag(lam))]``, response ``(b, 0)``."""
    n = p.a.shape[1]
    design = np.vstack([p.a, np.diag(np.sqrt(p.lam))])
    rhs = np.concatenate([p.b, np.zeros(n)])
    return _frozen(design), _frozen(rhs)


_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 generator; ``uniform`` maps the top 53 bits onto ``[0, 1)``."""

    def __init__(self, seed):
        self.state = int(seed) & _MASK64

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self, low=0.0, high=1.0):
        return low + (high - low) * ((self.next_u64() >> 11) / 9007199254740992.0)


@dataclass(frozen=True)
class Fixture:
    problem: Problem
    x_ini: np.ndarray
    noise: np.ndarray
    seed: int


def generate_fixture_data(seed, rows=9, cols=7, noise=True, shrink=0.5):
    """Random regression instance together with its ground truth.

    ``a`` is filled row-major with uniform(0, 1) draws, then ``rows`` noise
    factors uniform(0.9, 1.1) are drawn; ``b = (a @ x_ini) * noise`` with
    ``x_ini = (1, ..., cols)``. With ``noise=False`` the factors are all 1 but
    ``a`` is unchanged for the same seed.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive")
    rng = SplitMix64(seed)
    a = np.array([[rng.uniform() for _ in range(cols)] for _ in range(rows)])
    factors = np.array([rng.uniform(0.9, 1.1) for _ in range(rows)])
    if not noise:
        factors = np.ones(rows)
    x_ini = np.arange(1, cols + 1, dtype=float)
    b = (a @ x_ini) * factors
    problem = Problem(a, b, np.full(cols, float(shrink)))
    return Fixture(problem, _frozen(x_ini), _frozen(factors), int(seed))


def generate_fixture(seed, rows=9, cols=7, noise=True, shrink=0.5):
    """Seeded 9x7 test problem with ``lam = 0.5`` (shape and shrink overridable)."""
    return generate_fixture_data(seed, rows, cols, noise, shrink).problem
