"""Lasso, non-negative lasso and their equivalent quadratic-penalty models."""

from .estimators import (
    AugmentedNNLSRegression,
    BlendPenaltyRegression,
    FreeSignLasso,
    NonNegativeLasso,
    QuadraticPenaltyRegression,
    SignedRidge,
)
from .linalg import NotPositiveDefiniteError, QRFactors, RankDeficientError, cholesky, householder_qr, solve_ls
from .models import (
    AugmentedProblem,
    PenaltyBlend,
    Problem,
    build_augmented,
    build_blend_augmentation,
    build_quadratic_penalty,
    build_ridge_augmented,
    decompose_signed,
    generate_fixture,
    recompose,
)
from .nnls import NnlsResult, NonConvergenceError, nnls, nnls_warm
from .path import PathTrace, path_continuity_check, path_over_alpha, path_over_rhs
from .solvers import (
    Solution,
    fit_augmented,
    fit_free_lasso,
    fit_nn_lasso_cd,
    fit_nn_ridge,
    fit_quadratic,
    ridge_closed_form,
)
from .verification import KktReport, kkt_report, lambda1_map

__version__ = "0.1.0"
