"""Lawson-Hanson active-set solver for non-negative least squares.

Minimizes ``0.5 * ||b - A x||^2`` subject to ``x >= 0``. The passive-set
subproblems are solved through Householder QR; callers that re-solve with a
changing right-hand side can share a factor cache between calls so each
passive set is factored once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import DimensionError, RankDeficientError, as_matrix, as_vector, householder_qr, solve_ls


class NonConvergenceError(RuntimeError):
    """Iteration limit reached; ``result`` holds the best iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@dataclass
class NnlsResult:
    """Output of :func:`nnls`.

    ``dual`` is ``A^T (A x - b)``, the multiplier of ``x >= 0``; it vanishes on
    the passive set and is non-negative (to tolerance) on ``active_set``.
    """

    x: np.ndarray
    residual: np.ndarray
    dual: np.ndarray
    iterations: int
    active_set: frozenset
    converged: bool = True
    objective_trace: list = field(default_factory=list)

    @property
    def objective(self):
        return 0.5 * float(self.residual @ self.residual)


def default_tol(a, b):
    return 1e-10 * (1.0 + np.max(np.abs(a.T @ b), initial=0.0))


def _passive_solve(a, b, passive, cache):
    key = tuple(passive)
    f = cache.get(key) if cache is not None else None
    if f is None:
        f = householder_qr(a[:, passive])
        if cache is not None:
            cache[key] = f
    z = np.zeros(a.shape[1])
    z[passive] = solve_ls(f, b)
    return z


def _check(a, b, tol, max_iter):
    a = as_matrix(a, "a")
    b = as_vector(b, "b")
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"a has {a.shape[0]} rows but b has length {b.shape[0]}")
    if tol is None:
        tol = default_tol(a, b)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter is None:
        max_iter = 10 * a.shape[1]
    return a, b, tol, max_iter


def nnls(a, b, tol=None, max_iter=None, *, factor_cache=None):
    """Solve ``min 0.5 ||b - a x||^2`` subject to ``x >= 0``.

    Parameters
    ----------
    a : array_like, shape (m, n)
    b : array_like, shape (m,)
    tol : float, optional
        Dual tolerance; a column enters the passive set only if its gradient
        exceeds ``tol``. Defaults to ``1e-10 * (1 + ||a^T b||_inf)``.
    max_iter : int, optional
        Limit on outer iterations, default ``10 * n``.
    factor_cache : dict, optional
        Maps passive index tuples to :class:`~quadlasso.linalg.QRFactors`
        of the corresponding column subset of ``a``. Only share a cache
        between calls with the same ``a``.

    Returns
    -------
    NnlsResult

    Raises
    ------
    NonConvergenceError
        If ``max_iter`` outer iterations do not reach a KKT point.
    """
    return nnls_warm(a, b, (), tol, max_iter, factor_cache=factor_cache, _cold=True)


def nnls_warm(a, b, start_active_set, tol=None, max_iter=None, *, factor_cache=None, _cold=False):
    """Like :func:`nnls` but starting from a guessed active set.

    Columns outside ``start_active_set`` start passive. Passive columns whose
    least-squares value is not positive are dropped until the start is
    feasible, then the usual iteration takes over, so the guess affects the
    iteration count only.
    """
    a, b, tol, max_iter = _check(a, b, tol, max_iter)
    n = a.shape[1]
    passive_mask = np.zeros(n, dtype=bool)
    if not _cold:
        start_active = {int(j) for j in start_active_set}
        if any(j < 0 or j >= n for j in start_active):
            raise IndexError("start_active_set contains out-of-range columns")
        passive_mask[[j for j in range(n) if j not in start_active]] = True

    x = np.zeros(n)
    # feasible start: drop passive columns until the restricted solve is positive
    while passive_mask.any():
        passive = np.flatnonzero(passive_mask)
        try:
            z = _passive_solve(a, b, passive, factor_cache)
        except RankDeficientError as exc:
            passive_mask[passive[exc.column]] = False
            continue
        bad = passive[z[passive] <= 0.0]
        if bad.size == 0:
            x = z
            break
        passive_mask[bad] = False

    residual = b - a @ x
    w = a.T @ residual
    trace = [0.5 * float(residual @ residual)]
    iterations = 0
    excluded = np.zeros(n, dtype=bool)
    degenerate_run = 0

    while True:
        candidates = ~passive_mask & ~excluded
        if not candidates.any():
            break
        scores = np.where(candidates, w, -np.inf)
        j = int(np.argmax(scores))  # lowest index on ties
        if scores[j] <= tol:
            break
        if iterations >= max_iter:
            result = _result(a, b, x, iterations, passive_mask, trace, converged=False)
            raise NonConvergenceError(f"nnls did not converge in {max_iter} iterations", result)
        iterations += 1

        passive_mask[j] = True
        x_before = x.copy()
        entered = True
        while True:
            passive = np.flatnonzero(passive_mask)
            try:
                z = _passive_solve(a, b, passive, factor_cache)
            except RankDeficientError:
                # the entering column is numerically dependent on the passive set
                passive_mask[j] = False
                entered = False
                break
            if z[j] <= 0.0 and np.array_equal(x, x_before):
                passive_mask[j] = False
                entered = False
                break
            blocking = passive[z[passive] <= 0.0]
            if blocking.size == 0:
                x = z
                break
            steps = x[blocking] / (x[blocking] - z[blocking])
            k = int(np.argmin(steps))
            step = steps[k]
            x = x + step * (z - x)
            x[blocking[k]] = 0.0
            x[passive_mask & (x <= 0.0)] = 0.0
            passive_mask &= x > 0.0

        if not entered:
            excluded[j] = True
            degenerate_run += 1
            if degenerate_run >= n:
                break
            continue
        excluded[:] = False
        degenerate_run = 0
        residual = b - a @ x
        w = a.T @ residual
        trace.append(0.5 * float(residual @ residual))

    return _result(a, b, x, iterations, passive_mask, trace, converged=True)


def _result(a, b, x, iterations, passive_mask, trace, converged):
    x = np.where(passive_mask, x, 0.0)
    residual = b - a @ x
    return NnlsResult(
        x=x,
        residual=residual,
        dual=-(a.T @ residual),
        iterations=iterations,
        active_set=frozenset(int(j) for j in np.flatnonzero(~passive_mask)),
        converged=converged,
        objective_trace=trace,
    )
