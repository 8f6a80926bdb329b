"""Fitting routines for the lasso family and its quadratic equivalents.

``fit_nn_lasso_cd`` is the reference solver for the non-negative lasso
``0.5 ||b - a x||^2 + lam^T x, x >= 0``. ``fit_augmented`` solves the same
problem class through a single extra least-squares row and NNLS; its solution
coincides with the non-negative lasso at the rescaled shrink vector
``|t - lam^T x| lam``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import RankDeficientError, householder_qr, solve_ls, solve_shifted_normal
from .models import Problem, build_augmented, decompose_signed, recompose, split_signed
from .nnls import NonConvergenceError, nnls, nnls_warm

MODEL_TAGS = ("free_lasso", "nn_lasso", "augmented", "quadratic", "nn_ridge", "ridge_closed_form")


class UnboundedDirectionError(ValueError):
    """A zero column carries no penalty, so its coefficient is undetermined."""


@dataclass
class Solution:
    x: np.ndarray
    residual: np.ndarray
    objective: float
    dual: np.ndarray
    model_tag: str
    solver_stats: dict = field(default_factory=dict)

    @property
    def converged(self):
        return bool(self.solver_stats.get("converged", True))


def lasso_objective(p, x):
    r = p.b - p.a @ x
    return 0.5 * float(r @ r) + float(p.lam @ np.abs(x))


def augmented_objective(p, x, t=0.0):
    r = p.b - p.a @ x
    s = t - float(p.lam @ x)
    return 0.5 * float(r @ r) + 0.5 * s * s


def quadratic_objective(p, x):
    r = p.b - p.a @ x
    cx = p.lam * float(p.lam @ x)
    return 0.5 * float(r @ r) + 0.5 * float(x @ cx)


def _cd_tol(p):
    return 1e-10 * (1.0 + np.max(np.abs(p.b), initial=0.0))


def _polish_support(p, x):
    """Solve the support-restricted stationarity ``a_S^T (b - a_S x_S) = lam_S`` exactly.

    Returns the refined vector, or ``x`` unchanged when the support system is
    singular or the refined point leaves the non-negative orthant.
    """
    support = np.flatnonzero(x > 0.0)
    if support.size == 0 or support.size > p.a.shape[0]:
        return x
    try:
        f = householder_qr(p.a[:, support])
        xs = solve_shifted_normal(f, p.b, p.lam[support])
    except RankDeficientError:
        return x
    if np.any(xs <= 0.0):
        return x
    refined = np.zeros_like(x)
    refined[support] = xs
    before = lasso_objective(p, x)
    if lasso_objective(p, refined) > before + 1e-12 * (1.0 + abs(before)):
        return x
    return refined


def fit_nn_lasso_cd(p, tol=None, max_iter=100_000, polish=True):
    """Non-negative lasso by cyclic coordinate descent from ``x = 0``.

    Each sweep applies ``x_j <- max(0, (a_j^T r_j - lam_j) / a_j^T a_j)`` with
    ``r_j`` the residual excluding column ``j``. Iteration stops when the
    largest coordinate change of a sweep is at most ``tol`` (default
    ``1e-10 * (1 + ||b||_inf)``). With ``polish`` the converged support is
    then re-solved exactly by QR, removing the tail error of the sweeps.

    Raises
    ------
    UnboundedDirectionError
        If some column is identically zero while its shrink is zero.
    NonConvergenceError
        If ``max_iter`` sweeps do not meet the tolerance.
    """
    if tol is None:
        tol = _cd_tol(p)
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b, lam = p.a, p.b, p.lam
    n = a.shape[1]
    gram = a.T @ a
    atb = a.T @ b
    diag = np.diag(gram).copy()
    dead = diag == 0.0
    if np.any(dead & (lam == 0.0)):
        j = int(np.flatnonzero(dead & (lam == 0.0))[0])
        raise UnboundedDirectionError(f"column {j} is zero and unpenalized")

    x = np.zeros(n)
    # grad holds a^T (b - a x)
    grad = atb.copy()
    objectives = [lasso_objective(p, x)]
    sweeps = 0
    converged = False
    while sweeps < max_iter:
        sweeps += 1
        max_change = 0.0
        for j in range(n):
            if dead[j]:
                continue
            old = x[j]
            new = max(0.0, (grad[j] + diag[j] * old - lam[j]) / diag[j])
            delta = new - old
            if delta != 0.0:
                x[j] = new
                grad -= gram[:, j] * delta
                max_change = max(max_change, abs(delta))
        objectives.append(lasso_objective(p, x))
        if max_change <= tol:
            converged = True
            break

    if not converged:
        partial = _solution(p, x, "nn_lasso", {"iterations": sweeps, "converged": False})
        raise NonConvergenceError(f"coordinate descent did not converge in {max_iter} sweeps", partial)
    if polish:
        x = _polish_support(p, x)
    stats = {"iterations": sweeps, "converged": True, "objective_trace": objectives}
    return _solution(p, x, "nn_lasso", stats)


def _solution(p, x, tag, stats):
    residual = p.b - p.a @ x
    dual = p.lam - p.a.T @ residual
    return Solution(x, residual, lasso_objective(p, x), dual, tag, stats)


def fit_augmented(p, t=0.0, tol=None, max_iter=None, *, start_active_set=None, factor_cache=None):
    """Non-negative least squares on ``[a; lam^T] x ~ [b; t]``.

    ``residual`` covers the original ``m`` rows; the extra-row residual
    ``t - lam^T x`` is ``solver_stats["penalty_residual"]`` and the equivalent
    non-negative lasso shrink ``|t - lam^T x| lam`` is ``solver_stats["lambda1"]``.
    """
    aug = build_augmented(p, t)
    if start_active_set is None:
        res = nnls(aug.a_tilde, aug.b_tilde, tol, max_iter, factor_cache=factor_cache)
    else:
        res = nnls_warm(aug.a_tilde, aug.b_tilde, start_active_set, tol, max_iter, factor_cache=factor_cache)
    x = res.x
    penalty_residual = float(t) - float(p.lam @ x)
    lam1 = abs(penalty_residual) * p.lam
    stats = {
        "iterations": res.iterations,
        "converged": res.converged,
        "penalty_residual": penalty_residual,
        "lambda1": lam1,
        "degenerate_lambda1": bool(penalty_residual == 0.0),
        "active_set": res.active_set,
        "t": float(t),
    }
    return Solution(x, p.b - p.a @ x, augmented_objective(p, x, t), res.dual, "augmented", stats)


def fit_quadratic(p, tol=None, max_iter=None):
    """Minimize ``0.5 ||b - a x||^2 + 0.5 x^T (lam lam^T) x`` over ``x >= 0``.

    ``x^T (lam lam^T) x = (lam^T x)^2`` so this is exactly the augmented fit
    with ``t = 0``; only the reporting differs.
    """
    sol = fit_augmented(p, 0.0, tol, max_iter)
    sol.objective = quadratic_objective(p, sol.x)
    sol.model_tag = "quadratic"
    return sol


def fit_nn_ridge(p, tol=None, max_iter=None):
    """Non-negative ridge with penalty matrix ``lam lam^T``; same fit as :func:`fit_quadratic`."""
    sol = fit_quadratic(p, tol, max_iter)
    sol.model_tag = "nn_ridge"
    return sol


def fit_free_lasso(p, tol=None, max_iter=100_000):
    """Lasso with free signs, ``0.5 ||b - a x||^2 + lam^T |x|``.

    Solved as a non-negative lasso on ``[a, -a]`` and recomposed. The stats
    keep the positive and negative parts.
    """
    doubled = decompose_signed(p)
    sol = fit_nn_lasso_cd(doubled, tol, max_iter)
    x_plus, x_minus = split_signed(sol.x)
    x = recompose(x_plus, x_minus)
    residual = p.b - p.a @ x
    stats = dict(sol.solver_stats, x_plus=x_plus, x_minus=x_minus)
    # dual of the doubled problem; the first n entries belong to x+
    return Solution(x, residual, lasso_objective(p, x), sol.dual, "free_lasso", stats)


def ridge_closed_form(p, signs):
    """``(a^T a + lam lam^T)^{-1} a^T b`` with columns sign-flipped by ``signs``.

    Solved as least squares on ``[a S; lam^T]`` with zero penalty response,
    then flipped back: ``x = S z``.

    Raises
    ------
    RankDeficientError
        If the stacked system is singular.
    """
    signs = np.asarray(signs, dtype=float)
    if signs.shape != (p.a.shape[1],) or not np.all(np.abs(signs) == 1.0):
        raise ValueError("signs must be a vector of +1/-1 with one entry per column")
    flipped = Problem(p.a * signs, p.b, p.lam)
    aug = build_augmented(flipped, 0.0)
    z = solve_ls(householder_qr(aug.a_tilde), aug.b_tilde)
    return signs * z


FITTERS = {
    "nn_lasso": fit_nn_lasso_cd,
    "augmented": fit_augmented,
    "quadratic": fit_quadratic,
    "nn_ridge": fit_nn_ridge,
    "free_lasso": fit_free_lasso,
}
