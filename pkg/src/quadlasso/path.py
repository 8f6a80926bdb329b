"""Solution paths over the augmented right-hand side and the ridge/lasso blend."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, as_vector, cholesky
from .models import PenaltyBlend, Problem, build_augmented, build_blend_augmentation
from .nnls import nnls_warm
from .solvers import fit_augmented


@dataclass(frozen=True)
class PathPoint:
    value: float
    x: np.ndarray
    objective: float
    active_set: frozenset
    lambda1: np.ndarray | None = None


@dataclass
class PathTrace:
    parameter_name: str
    points: list = field(default_factory=list)
    factorizations: int = 0

    @property
    def values(self):
        return np.array([pt.value for pt in self.points])

    @property
    def xs(self):
        return np.array([pt.x for pt in self.points])

    @property
    def objectives(self):
        return np.array([pt.objective for pt in self.points])

    def __len__(self):
        return len(self.points)


def _check_grid(grid, name):
    grid = as_vector(grid, name)
    if grid.size > 1:
        steps = np.diff(grid)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError(f"{name} must be strictly monotone")
    return grid


def path_over_rhs(p, t_grid, tol=None):
    """Augmented solutions ``x(t)`` for each penalty-row response ``t``.

    The design ``[a; lam^T]`` is fixed along the path, so QR factors of each
    passive column set are cached and reused; only ``Q^T b~`` is recomputed.
    Each point warm-starts from the previous active set. Points store
    ``lambda1 = |t - lam^T x(t)| lam``.
    """
    t_grid = _check_grid(t_grid, "t_grid")
    cache = {}
    trace = PathTrace("rhs_t")
    active = None
    for t in t_grid:
        sol = fit_augmented(p, float(t), tol, start_active_set=active, factor_cache=cache)
        active = sol.solver_stats["active_set"]
        trace.points.append(
            PathPoint(float(t), sol.x, sol.objective, active, sol.solver_stats["lambda1"])
        )
    trace.factorizations = len(cache)
    return trace


def lift_quadratic_loss(loss_matrix, center):
    """Write ``(x - c)^T Q (x - c)`` as ``||A x - b||^2`` with ``A = L^T``, ``b = L^T c``."""
    lower = cholesky(as_matrix(loss_matrix, "loss_matrix"))
    center = as_vector(center, "center")
    return lower.T, lower.T @ center


def _stack_blend(a_loss, b_loss, lam, alpha):
    rows = build_blend_augmentation(PenaltyBlend(float(alpha), lam))
    return np.vstack([a_loss, rows]), np.concatenate([b_loss, np.zeros(rows.shape[0])])


def blend_objective(loss_matrix, center, lam, alpha, x):
    """``(x - c)^T Q (x - c) + x^T ((1 - alpha) I + alpha lam lam^T) x``."""
    d = x - center
    return float(d @ loss_matrix @ d) + float(x @ PenaltyBlend(alpha, lam).matrix() @ x)


def path_over_alpha(loss_matrix, center, lam, alpha_grid=None, tol=None):
    """Non-negative minimizers of the ridge/lasso blend for each ``alpha``.

    ``alpha = 0`` is ridge with identity penalty; ``alpha = 1`` is the rank-one
    penalty ``lam lam^T`` that reproduces the lasso solution. Defaults to 101
    evenly spaced values on ``[0, 1]``.
    """
    if alpha_grid is None:
        alpha_grid = np.linspace(0.0, 1.0, 101)
    alpha_grid = _check_grid(alpha_grid, "alpha_grid")
    if np.any(alpha_grid < 0) or np.any(alpha_grid > 1):
        raise ValueError("alpha_grid must lie in [0, 1]")
    loss_matrix = as_matrix(loss_matrix, "loss_matrix")
    lam = as_vector(lam, "lambda")
    a_loss, b_loss = lift_quadratic_loss(loss_matrix, center)
    center = as_vector(center, "center")
    trace = PathTrace("alpha")
    active = ()
    for alpha in alpha_grid:
        a, b = _stack_blend(a_loss, b_loss, lam, alpha)
        res = nnls_warm(a, b, active, tol)
        active = res.active_set
        obj = blend_objective(loss_matrix, center, lam, float(alpha), res.x)
        trace.points.append(PathPoint(float(alpha), res.x, obj, active))
    return trace


def blend_problem(loss_matrix, center, lam, alpha):
    """Least-squares :class:`Problem` (with zero shrink) whose NNLS fit is the blend point."""
    a, b = _stack_blend(*lift_quadratic_loss(loss_matrix, center), lam, alpha)
    return Problem(a, b, 0.0)


def rhs_problem(p, t):
    """Zero-shrink :class:`Problem` for the augmented system at penalty response ``t``."""
    aug = build_augmented(p, t)
    return Problem(aug.a_tilde, aug.b_tilde, 0.0)


def path_continuity_check(trace, lipschitz_bound):
    """True iff consecutive points satisfy ``||dx||_inf <= bound * |dp|``."""
    if len(trace.points) < 2:
        raise ValueError("continuity needs at least two path points")
    xs = trace.xs
    values = trace.values
    jumps = np.max(np.abs(np.diff(xs, axis=0)), axis=1)
    return bool(np.all(jumps <= lipschitz_bound * np.abs(np.diff(values))))
