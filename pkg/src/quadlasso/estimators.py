"""scikit-learn compatible regressors over the functional solvers.

None of the estimators fits an intercept; center the data beforehand or put
a constant column in ``X`` if one is needed. ``shrink`` is either a scalar
(broadcast to every feature) or one non-negative weight per feature.
"""

from __future__ import annotations

from numbers import Real

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .models import PenaltyBlend, Problem, build_blend_augmentation, build_quadratic_penalty
from .nnls import nnls
from .solvers import fit_augmented, fit_free_lasso, fit_nn_lasso_cd, fit_quadratic, ridge_closed_form


class _ShrinkRegressor(RegressorMixin, BaseEstimator):
    """Shared validation and prediction for the linear models below."""

    def _problem(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True, dtype=np.float64)
        if isinstance(self.shrink, Real) and self.shrink < 0:
            raise ValueError(f"shrink must be non-negative, got {self.shrink}")
        return Problem(X, y, self.shrink)

    def _store(self, sol):
        self.coef_ = np.array(sol.x)
        self.objective_ = sol.objective
        self.n_iter_ = sol.solver_stats.get("iterations", 0)
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        return X @ self.coef_


class NonNegativeLasso(_ShrinkRegressor):
    """Lasso with ``coef_ >= 0``, fitted by coordinate descent.

    Minimizes ``0.5 * ||y - X w||^2 + shrink^T w`` over ``w >= 0`` (no
    ``1 / n_samples`` scaling).

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    dual_ : ndarray of shape (n_features,)
        ``shrink - X^T (y - X w)``; zero on the support, non-negative elsewhere.
    n_iter_ : int
        Coordinate descent sweeps.
    """

    def __init__(self, shrink=1.0, tol=None, max_iter=100_000):
        self.shrink = shrink
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        p = self._problem(X, y)
        sol = fit_nn_lasso_cd(p, self.tol, self.max_iter)
        self.dual_ = sol.dual
        return self._store(sol)


class FreeSignLasso(_ShrinkRegressor):
    """Ordinary (signed) lasso, solved via the split ``w = w+ - w-``."""

    def __init__(self, shrink=1.0, tol=None, max_iter=100_000):
        self.shrink = shrink
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        sol = fit_free_lasso(self._problem(X, y), self.tol, self.max_iter)
        self.coef_positive_ = sol.solver_stats["x_plus"]
        self.coef_negative_ = sol.solver_stats["x_minus"]
        return self._store(sol)


class AugmentedNNLSRegression(_ShrinkRegressor):
    """Non-negative least squares with ``shrink^T`` appended as an extra data row.

    Parameters
    ----------
    shrink : float or array-like of shape (n_features,)
    rhs : float, default 0.0
        Response of the appended row. Raising it weakens the effective shrinkage.
    tol, max_iter
        Passed to the NNLS solver.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    lambda1_ : ndarray of shape (n_features,)
        ``|rhs - shrink^T coef_| * shrink``, the non-negative lasso weights that
        give the same coefficients.
    penalty_residual_ : float
    active_set_ : frozenset of int
    """

    def __init__(self, shrink=1.0, rhs=0.0, tol=None, max_iter=None):
        self.shrink = shrink
        self.rhs = rhs
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        sol = fit_augmented(self._problem(X, y), self.rhs, self.tol, self.max_iter)
        self.lambda1_ = sol.solver_stats["lambda1"]
        self.penalty_residual_ = sol.solver_stats["penalty_residual"]
        self.active_set_ = sol.solver_stats["active_set"]
        return self._store(sol)


class QuadraticPenaltyRegression(_ShrinkRegressor):
    """Non-negative regression with rank-one penalty ``0.5 * w^T (s s^T) w``, ``s = shrink``."""

    def __init__(self, shrink=1.0, tol=None, max_iter=None):
        self.shrink = shrink
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        p = self._problem(X, y)
        sol = fit_quadratic(p, self.tol, self.max_iter)
        self.penalty_matrix_ = build_quadratic_penalty(p.lam)
        self.lambda1_ = sol.solver_stats["lambda1"]
        return self._store(sol)


class BlendPenaltyRegression(_ShrinkRegressor):
    """Non-negative regression with penalty ``0.5 * w^T ((1 - alpha) I + alpha s s^T) w``.

    ``alpha = 0`` is non-negative ridge, ``alpha = 1`` matches
    :class:`QuadraticPenaltyRegression`.
    """

    def __init__(self, shrink=1.0, alpha=1.0, tol=None, max_iter=None):
        self.shrink = shrink
        self.alpha = alpha
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        p = self._problem(X, y)
        rows = build_blend_augmentation(PenaltyBlend(float(self.alpha), p.lam))
        a = np.vstack([p.a, rows])
        b = np.concatenate([p.b, np.zeros(rows.shape[0])])
        res = nnls(a, b, self.tol, self.max_iter)
        self.coef_ = res.x
        self.objective_ = res.objective
        self.n_iter_ = res.iterations
        self.active_set_ = res.active_set
        return self


class SignedRidge(_ShrinkRegressor):
    """Closed form ``(X^T X + s s^T)^{-1} X^T y`` for columns with known signs.

    ``signs`` flips each column before solving and flips the result back; it
    defaults to all ``+1``.
    """

    def __init__(self, shrink=1.0, signs=None):
        self.shrink = shrink
        self.signs = signs

    def fit(self, X, y):
        p = self._problem(X, y)
        signs = np.ones(p.a.shape[1]) if self.signs is None else np.asarray(self.signs, dtype=float)
        self.coef_ = ridge_closed_form(p, signs)
        self.n_iter_ = 0
        return self
