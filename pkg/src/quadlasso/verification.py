"""Solver-independent optimality and equivalence checks.

The multiplier ``mu = lam - a^T (b - a x)`` is recomputed from the candidate
``x`` alone, so none of these checks trusts what a solver reports about itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError, as_vector
from .models import build_augmented, build_quadratic_penalty

DEFAULT_KKT_TOL = 1e-8


@dataclass(frozen=True)
class KktReport:
    """Residuals of the non-negative lasso optimality system.

    Attributes
    ----------
    stationarity_gap : float
        ``max_j |lam_j - a_j^T eps - mu_j|`` where ``mu_j`` is the value the
        complementarity condition allows: zero on the support (``x_j > tol``)
        and ``max(lam_j - a_j^T eps, 0)`` off it. On the support this is
        ``|a_j^T eps - lam_j|``.
    primal_violation : float
        ``max(0, -min_j x_j)``.
    dual_violation : float
        ``max(0, -min_j mu_j)`` for ``mu = lam - a^T eps``.
    complementarity : float
        ``|x^T mu|``.
    """

    stationarity_gap: float
    primal_violation: float
    dual_violation: float
    complementarity: float
    tol: float
    residual: np.ndarray
    mu: np.ndarray

    @property
    def passes(self):
        return self.max_residual <= self.tol

    @property
    def max_residual(self):
        return max(self.stationarity_gap, self.primal_violation, self.dual_violation, self.complementarity)

    def as_dict(self):
        return {
            "stationarity": self.stationarity_gap,
            "primal": self.primal_violation,
            "dual": self.dual_violation,
            "complementarity": self.complementarity,
        }


def kkt_report(p, x, tol=DEFAULT_KKT_TOL):
    x = as_vector(x, "x")
    if x.shape[0] != p.a.shape[1]:
        raise DimensionError(f"x has length {x.shape[0]}, expected {p.a.shape[1]}")
    eps = p.b - p.a @ x
    corr = p.a.T @ eps
    mu = p.lam - corr
    support = x > tol
    mu_allowed = np.where(support, 0.0, np.maximum(mu, 0.0))
    stationarity = float(np.max(np.abs(mu - mu_allowed), initial=0.0))
    return KktReport(
        stationarity_gap=stationarity,
        primal_violation=float(max(0.0, -np.min(x, initial=0.0))),
        dual_violation=float(max(0.0, -np.min(mu, initial=0.0))),
        complementarity=float(abs(x @ mu)),
        tol=tol,
        residual=eps,
        mu=mu,
    )


def lambda1_map(p, x_annl, t=0.0):
    """Shrink vector ``|t - lam^T x| lam`` under which the non-negative lasso
    shares the augmented solution ``x_annl``."""
    x_annl = as_vector(x_annl, "x_annl")
    if np.any(x_annl < 0):
        raise ValueError("x_annl must be non-negative")
    return abs(float(t) - float(p.lam @ x_annl)) * p.lam


def augmented_gradient_identity(p, x, t=0.0):
    """Max-norm gap between ``A~^T eps~`` and ``a^T eps + eps~_{m+1} lam``."""
    x = as_vector(x, "x")
    aug = build_augmented(p, t)
    eps_tilde = aug.b_tilde - aug.a_tilde @ x
    direct = aug.a_tilde.T @ eps_tilde
    eps = p.b - p.a @ x
    split = p.a.T @ eps + eps_tilde[aug.penalty_row_index] * p.lam
    return float(np.max(np.abs(direct - split), initial=0.0))


def penalty_gradient(lam, x):
    """Gradient ``lam (lam^T x)`` of ``0.5 x^T (lam lam^T) x``."""
    lam = as_vector(lam, "lambda")
    x = as_vector(x, "x")
    if lam.shape != x.shape:
        raise DimensionError("lambda and x must have equal length")
    return lam * float(lam @ x)


def finite_difference_gradient(f, x, step=None):
    """Central differences of scalar ``f`` at ``x``; default step ``1e-5 (1 + ||x||)``."""
    x = as_vector(x, "x")
    if step is None:
        step = 1e-5 * (1.0 + np.linalg.norm(x))
    g = np.empty_like(x)
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = step
        g[j] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g


def projection_property(lam):
    """``||C C - (lam^T lam) C||_inf`` for ``C = lam lam^T``."""
    c = build_quadratic_penalty(lam)
    s = float(np.asarray(lam, dtype=float) @ np.asarray(lam, dtype=float))
    return float(np.max(np.abs(c @ c - s * c), initial=0.0))


def parallel_defect(grad, lam):
    """Largest 2x2 determinant ``g_i lam_j - g_j lam_i``; zero when ``grad`` is parallel to ``lam``."""
    grad = as_vector(grad)
    lam = as_vector(lam)
    return float(np.max(np.abs(np.outer(grad, lam) - np.outer(lam, grad)), initial=0.0))


def support_is_unique(p, rtol=1e-10):
    """True when ``a`` has full column rank, so the non-negative lasso minimizer is unique."""
    if p.a.shape[0] < p.a.shape[1]:
        return False
    sv = np.linalg.svd(p.a, compute_uv=False)
    return bool(sv[-1] > rtol * sv[0])


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.residual <= self.tolerance)

    def as_dict(self):
        return {"name": self.name, "residual": self.residual, "tolerance": self.tolerance, "passed": self.passed}


def run_equivalence_checks(p, kkt_tol=DEFAULT_KKT_TOL, check_x=None):
    """Fit every model on ``p`` and test the equivalences between them.

    Returns a list of :class:`Check`. ``check_x``, when given, is tested
    against the optimality conditions of the augmented model (``t = 0``).
    Solver non-convergence propagates as an exception.
    """
    from .models import decompose_signed
    from .solvers import (
        augmented_objective,
        fit_augmented,
        fit_free_lasso,
        fit_nn_lasso_cd,
        fit_quadratic,
        lasso_objective,
        quadratic_objective,
    )

    checks = []
    aug = fit_augmented(p)
    xa = aug.x
    lam1 = lambda1_map(p, xa)
    p1 = p.with_lambda(lam1)
    cd1 = fit_nn_lasso_cd(p1)
    scale = 1.0 + np.max(np.abs(xa), initial=0.0)
    if support_is_unique(p):
        checks.append(Check("equivalence_lambda1", float(np.max(np.abs(cd1.x - xa), initial=0.0)) / scale, 1e-6))
    else:
        ref = lasso_objective(p1, xa)
        gap = abs(cd1.objective - ref) / (1.0 + abs(ref))
        checks.append(Check("equivalence_lambda1_objective", gap, 1e-9))

    probes = [xa, xa + 1.0, 2.0 * xa, np.arange(1.0, p.a.shape[1] + 1)]
    gap = max(
        abs(augmented_objective(p, x) - quadratic_objective(p, x)) / (1.0 + abs(quadratic_objective(p, x)))
        for x in probes
    )
    checks.append(Check("objective_identity", gap, 1e-12))
    quad = fit_quadratic(p)
    checks.append(Check("quadratic_vs_augmented", float(np.max(np.abs(quad.x - xa), initial=0.0)), 1e-10))

    checks.append(Check("kkt_augmented", kkt_report(p1, xa, kkt_tol).max_residual, kkt_tol))
    checks.append(Check("kkt_nn_lasso_lambda1", kkt_report(p1, cd1.x, kkt_tol).max_residual, kkt_tol))
    cd = fit_nn_lasso_cd(p)
    checks.append(Check("kkt_nn_lasso", kkt_report(p, cd.x, kkt_tol).max_residual, kkt_tol))
    free = fit_free_lasso(p)
    split = np.concatenate([free.solver_stats["x_plus"], free.solver_stats["x_minus"]])
    checks.append(Check("kkt_free_lasso", kkt_report(decompose_signed(p), split, kkt_tol).max_residual, kkt_tol))

    aug_rows = np.vstack([p.a, p.lam])
    eps_tilde = np.append(p.b, 0.0) - aug_rows @ xa
    magnitude = float(np.max(np.abs(aug_rows).T @ np.abs(eps_tilde), initial=0.0))
    checks.append(Check("gradient_identity", augmented_gradient_identity(p, xa), 1e-13 * (1.0 + magnitude)))

    c = build_quadratic_penalty(p.lam)
    c_norm = float(np.max(np.abs(c).sum(axis=1), initial=0.0))
    checks.append(Check("projection_property", projection_property(p.lam), 1e-12 * (1.0 + c_norm**2)))

    x0 = xa + 1.0
    exact = penalty_gradient(p.lam, x0)
    fd = finite_difference_gradient(lambda z: 0.5 * float(z @ c @ z), x0)
    rel = float(np.max(np.abs(fd - exact), initial=0.0)) / (1.0 + float(np.max(np.abs(exact), initial=0.0)))
    checks.append(Check("penalty_gradient_fd", rel, 1e-6))

    if check_x is not None:
        check_x = as_vector(check_x, "check_x")
        own = p.with_lambda(abs(float(p.lam @ check_x)) * p.lam)
        checks.append(Check("kkt_check_x", kkt_report(own, check_x, kkt_tol).max_residual, kkt_tol))
    return checks
