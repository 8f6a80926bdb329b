import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_nn_lasso, brute_force_nnls, soft_threshold
from quadlasso.linalg import RankDeficientError, cholesky
from quadlasso.models import Problem, generate_fixture
from quadlasso.nnls import NonConvergenceError
from quadlasso.solvers import (
    UnboundedDirectionError,
    augmented_objective,
    fit_augmented,
    fit_free_lasso,
    fit_nn_lasso_cd,
    fit_nn_ridge,
    fit_quadratic,
    lasso_objective,
    quadratic_objective,
    ridge_closed_form,
)
from quadlasso.verification import kkt_report, lambda1_map

WORKED = Problem(np.eye(2), [2.0, 3.0], [1.0, 1.0])


def test_cd_identity_soft_threshold():
    sol = fit_nn_lasso_cd(WORKED)
    np.testing.assert_allclose(sol.x, [1.0, 2.0], atol=1e-12)
    assert sol.model_tag == "nn_lasso"
    assert sol.objective == pytest.approx(lasso_objective(WORKED, sol.x), rel=1e-12)


def test_cd_full_shrinkage():
    p = generate_fixture(1)
    big = 1.1 * np.max(p.a.T @ p.b)
    np.testing.assert_array_equal(fit_nn_lasso_cd(p.with_lambda(big)).x, np.zeros(7))


def test_cd_rescaled_worked_example():
    sol = fit_nn_lasso_cd(WORKED.with_lambda([5 / 3, 5 / 3]))
    np.testing.assert_allclose(sol.x, [1 / 3, 4 / 3], atol=1e-12)


def test_cd_zero_unpenalized_column():
    with pytest.raises(UnboundedDirectionError):
        fit_nn_lasso_cd(Problem([[1.0, 0.0], [0.0, 0.0]], [1, 1], [0.5, 0.0]))


def test_cd_zero_penalized_column_stays_zero():
    sol = fit_nn_lasso_cd(Problem([[1.0, 0.0], [2.0, 0.0]], [1, 1], [0.5, 0.5]))
    assert sol.x[1] == 0.0


def test_cd_nonconvergence():
    with pytest.raises(NonConvergenceError) as info:
        fit_nn_lasso_cd(generate_fixture(2).with_lambda(0.01), max_iter=2)
    assert info.value.result.solver_stats["converged"] is False


def test_cd_monotone_objective():
    sol = fit_nn_lasso_cd(generate_fixture(3), polish=False)
    trace = np.array(sol.solver_stats["objective_trace"])
    assert np.all(np.diff(trace) <= 1e-12 * (1 + abs(trace[0])))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_cd_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    a = rng.normal(size=(n + 3, n))
    b = rng.normal(size=n + 3) * 2
    lam = rng.uniform(0, 1.5, size=n)
    sol = fit_nn_lasso_cd(Problem(a, b, lam))
    x_ref, f_ref = brute_force_nn_lasso(a, b, lam)
    assert abs(sol.objective - f_ref) <= 1e-9 * (1 + abs(f_ref))
    np.testing.assert_allclose(sol.x, x_ref, atol=1e-7)


def test_augmented_worked_example():
    sol = fit_augmented(WORKED)
    np.testing.assert_allclose(sol.x, [1 / 3, 4 / 3], atol=1e-14)
    assert sol.solver_stats["penalty_residual"] == pytest.approx(-5 / 3, abs=1e-14)
    np.testing.assert_allclose(sol.solver_stats["lambda1"], [5 / 3, 5 / 3], atol=1e-14)
    np.testing.assert_allclose(sol.residual, [2 - 1 / 3, 3 - 4 / 3], atol=1e-14)


def test_augmented_zero_shrink_is_nnls():
    p = generate_fixture(4).with_lambda(0.0)
    x_ref, f_ref, _ = brute_force_nnls(p.a, p.b)
    sol = fit_augmented(p)
    np.testing.assert_allclose(sol.x, x_ref, atol=1e-9)
    assert sol.solver_stats["degenerate_lambda1"] is True
    np.testing.assert_array_equal(sol.solver_stats["lambda1"], np.zeros(7))


def test_augmented_rhs_monotone():
    p = generate_fixture(8)
    sums = [p.lam @ fit_augmented(p, t).x for t in (-1.0, 0.0, 1.0, 2.0)]
    assert np.all(np.diff(sums) >= -1e-12)


def test_quadratic_worked_example():
    sol = fit_quadratic(WORKED)
    np.testing.assert_allclose(sol.x, [1 / 3, 4 / 3], atol=1e-14)
    expected = 0.5 * ((2 - 1 / 3) ** 2 + (3 - 4 / 3) ** 2) + 0.5 * (5 / 3) ** 2
    assert sol.objective == pytest.approx(expected, rel=1e-14)
    assert sol.model_tag == "quadratic"


def test_quadratic_zero_shrink():
    p = generate_fixture(4).with_lambda(0.0)
    np.testing.assert_allclose(fit_quadratic(p).x, brute_force_nnls(p.a, p.b)[0], atol=1e-9)


def test_quadratic_on_lifted_fig2_problem():
    lower = cholesky([[1.0, 0.7], [0.7, 1.0]])
    p = Problem(lower.T, lower.T @ [2.0, 3.0], [1 / 2, 1 / 3])
    np.testing.assert_allclose(fit_quadratic(p).x, fit_augmented(p).x, atol=1e-10)


def test_nn_ridge_mirrors_quadratic():
    for seed in range(5):
        p = generate_fixture(seed)
        q, r = fit_quadratic(p), fit_nn_ridge(p)
        np.testing.assert_array_equal(q.x, r.x)
        assert q.objective == r.objective and r.model_tag == "nn_ridge"
    np.testing.assert_allclose(fit_nn_ridge(WORKED).x, [1 / 3, 4 / 3], atol=1e-14)


def test_free_lasso_signed_example():
    sol = fit_free_lasso(Problem(np.eye(2), [2.0, -3.0], [1.0, 1.0]))
    np.testing.assert_allclose(sol.x, [1.0, -2.0], atol=1e-12)
    assert sol.objective == pytest.approx(0.5 * 2 + 3.0)


def test_free_lasso_zero_response():
    np.testing.assert_array_equal(fit_free_lasso(Problem(np.eye(3), [0, 0, 0], 1.0)).x, np.zeros(3))


def test_free_lasso_positive_truth_matches_nn_lasso():
    fx = generate_fixture(10, noise=False)
    free = fit_free_lasso(fx)
    nn = fit_nn_lasso_cd(fx)
    assert np.all(free.x >= 0)
    np.testing.assert_allclose(free.x, nn.x, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_free_lasso_subgradient_conditions(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(8, 4))
    p = Problem(a, rng.normal(size=8) * 3, rng.uniform(0.1, 2, size=4))
    sol = fit_free_lasso(p)
    corr = a.T @ sol.residual
    tol = 1e-8
    zero = sol.x == 0
    assert np.all(np.abs(corr[zero]) <= p.lam[zero] + tol)
    np.testing.assert_allclose(corr[~zero], np.sign(sol.x[~zero]) * p.lam[~zero], atol=tol)
    assert np.all(np.minimum(sol.solver_stats["x_plus"], sol.solver_stats["x_minus"]) == 0)


def test_free_lasso_identity_soft_threshold(rng):
    b = rng.normal(size=5) * 3
    lam = rng.uniform(0, 2, size=5)
    np.testing.assert_allclose(fit_free_lasso(Problem(np.eye(5), b, lam)).x, soft_threshold(b, lam), atol=1e-10)


def test_ridge_closed_form_worked_example():
    np.testing.assert_allclose(ridge_closed_form(WORKED, [1, 1]), [1 / 3, 4 / 3], atol=1e-14)
    np.testing.assert_allclose(np.linalg.solve([[2, 1], [1, 2]], [2, 3]), [1 / 3, 4 / 3])


def test_ridge_closed_form_ols_limit(rng):
    a = rng.normal(size=(4, 4)) + 4 * np.eye(4)
    b = rng.normal(size=4)
    np.testing.assert_allclose(ridge_closed_form(Problem(a, b, 0.0), np.ones(4)), np.linalg.solve(a, b), atol=1e-12)


def test_ridge_closed_form_linear_in_b():
    p = generate_fixture(3)
    x = ridge_closed_form(p, np.ones(7))
    np.testing.assert_allclose(ridge_closed_form(Problem(p.a, 2 * p.b, p.lam), np.ones(7)), 2 * x, rtol=1e-12)


def test_ridge_closed_form_signs():
    p = Problem(np.eye(2), [2.0, -3.0], [1.0, 1.0])
    x = ridge_closed_form(p, [1, -1])
    c = np.outer(p.lam, p.lam)
    s = np.diag([1.0, -1.0])
    np.testing.assert_allclose(x, s @ np.linalg.solve(s @ s + c, s @ p.b), atol=1e-14)


def test_ridge_closed_form_singular():
    with pytest.raises(RankDeficientError):
        ridge_closed_form(Problem([[1.0, 1.0]], [1.0], 0.0), [1, 1])
    with pytest.raises(ValueError):
        ridge_closed_form(WORKED, [1, 0])


def test_ridge_closed_form_reproduces_positive_quadratic():
    for seed in range(30):
        p = generate_fixture(seed)
        q = fit_quadratic(p)
        if np.all(q.x > 0):
            np.testing.assert_allclose(ridge_closed_form(p, np.ones(7)), q.x, atol=1e-8)
    np.testing.assert_allclose(ridge_closed_form(WORKED, [1, 1]), fit_quadratic(WORKED).x, atol=1e-8)


@pytest.mark.parametrize("seed", range(10))
def test_equivalence_chain(seed):
    p = generate_fixture(seed)
    xa = fit_augmented(p).x
    lam1 = lambda1_map(p, xa)
    x = fit_nn_lasso_cd(p.with_lambda(lam1)).x
    assert np.max(np.abs(x - xa)) <= 1e-6 * (1 + np.max(np.abs(xa)))
    assert kkt_report(p.with_lambda(lam1), xa).passes


def test_objective_identity(rng):
    p = generate_fixture(12)
    for _ in range(50):
        x = rng.uniform(0, 5, size=7)
        q = quadratic_objective(p, x)
        assert abs(augmented_objective(p, x) - q) <= 1e-12 * abs(q)


def test_equivalence_holds_without_polish():
    # sweeps alone, no QR refinement, still reach the augmented solution
    worst = 0.0
    for seed in range(30):
        p = generate_fixture(seed)
        xa = fit_augmented(p).x
        x = fit_nn_lasso_cd(p.with_lambda(lambda1_map(p, xa)), polish=False).x
        worst = max(worst, np.max(np.abs(x - xa)) / (1 + np.max(np.abs(xa))))
    assert worst <= 1e-6
