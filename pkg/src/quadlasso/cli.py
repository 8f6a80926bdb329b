"""Command line interface: ``quadlasso {fit,verify,path,fixture}``.

Exit codes: 0 success, 1 input error, 2 non-convergence, 3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io as qio
from .linalg import NotPositiveDefiniteError, RankDeficientError
from .models import Problem, decompose_signed, generate_fixture_data
from .nnls import NonConvergenceError
from .path import path_over_alpha, path_over_rhs, rhs_problem
from .solvers import FITTERS, MODEL_TAGS, UnboundedDirectionError, quadratic_objective, ridge_closed_form
from .verification import DEFAULT_KKT_TOL, kkt_report, run_equivalence_checks

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED, EXIT_VERIFY = 0, 1, 2, 3


class InputError(Exception):
    pass


def parse_grid(text):
    """``start:stop:count`` (inclusive linspace), a comma list, or one number."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            count = int(count)
            if count < 1:
                raise ValueError
            return np.linspace(float(start), float(stop), count)
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise InputError(f"cannot parse grid {text!r}") from None


def _parse_signs(tokens, n):
    if tokens is None:
        return np.ones(n)
    mapping = {"+": 1.0, "+1": 1.0, "1": 1.0, "-": -1.0, "-1": -1.0}
    try:
        signs = np.array([mapping[t] for t in tokens])
    except KeyError as exc:
        raise InputError(f"invalid sign {exc.args[0]!r}; use + or -") from None
    if signs.shape[0] != n:
        raise InputError(f"--signs needs {n} entries, got {signs.shape[0]}")
    return signs


def _lambda(args):
    if getattr(args, "lambda_file", None):
        return qio.read_vector(args.lambda_file)
    text = args.shrink if args.shrink is not None else "0"
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"cannot parse --lambda {text!r}") from None
    return values[0] if len(values) == 1 else np.array(values)


def _load_problem(args):
    a = qio.read_matrix(args.a)
    b = qio.read_vector(args.b)
    if a.shape[0] != b.shape[0]:
        raise InputError(f"A has {a.shape[0]} rows but b has {b.shape[0]} entries")
    return Problem(a, b, _lambda(args))


def _emit(text, output):
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _fit_report(p, args):
    """Fit ``args.model``; returns ``(report, converged)``."""
    model = args.model
    converged = True
    lambda1 = None
    if model == "ridge_closed_form":
        signs = _parse_signs(args.signs, p.a.shape[1])
        x = ridge_closed_form(p, signs)
        objective = quadratic_objective(p, x)
        flipped = Problem(p.a * signs, p.b, p.lam)
        kkt = kkt_report(rhs_problem(flipped, 0.0), signs * x, args.kkt_tol)
        stats = {"iterations": 0, "converged": True}
    else:
        kwargs = {"tol": args.tol}
        if args.max_iter is not None:
            kwargs["max_iter"] = args.max_iter
        if model == "augmented":
            kwargs["t"] = args.t
        try:
            sol = FITTERS[model](p, **kwargs)
            x, objective = sol.x, sol.objective
            stats = {"iterations": sol.solver_stats.get("iterations", 0), "converged": True}
            if model == "augmented":
                lambda1 = sol.solver_stats["lambda1"]
        except NonConvergenceError as exc:
            converged = False
            partial = exc.result
            x = np.asarray(partial.x) if partial is not None else np.full(p.a.shape[1], np.nan)
            objective = float("nan")
            iterations = getattr(partial, "iterations", None)
            if iterations is None and partial is not None:
                iterations = partial.solver_stats.get("iterations", 0)
            stats = {"iterations": iterations, "converged": False}
            if model == "free_lasso" and x.shape[0] == 2 * p.a.shape[1]:
                n = p.a.shape[1]
                x = x[:n] - x[n:]
        if model == "nn_lasso":
            kkt = kkt_report(p, x, args.kkt_tol)
        elif model == "free_lasso":
            split = np.concatenate([np.maximum(x, 0.0), np.maximum(-x, 0.0)])
            kkt = kkt_report(decompose_signed(p), split, args.kkt_tol)
        else:
            kkt = kkt_report(rhs_problem(p, args.t if model == "augmented" else 0.0), x, args.kkt_tol)
    report = {"model": model, "x": x, "objective": objective, "kkt": kkt.as_dict(), "stats": stats}
    if lambda1 is not None:
        report["lambda1"] = lambda1
    return report, converged


def _fit_csv(report):
    lines = ["x," + ",".join(qio.fmt(v) for v in report["x"])]
    lines.append("objective," + qio.fmt(report["objective"]))
    for key, value in report["kkt"].items():
        lines.append(f"kkt_{key}," + qio.fmt(value))
    lines.append(f"iterations,{report['stats']['iterations']}")
    lines.append(f"converged,{str(report['stats']['converged']).lower()}")
    if "lambda1" in report:
        lines.append("lambda1," + ",".join(qio.fmt(v) for v in report["lambda1"]))
    return "\n".join(lines) + "\n"


def cmd_fit(args):
    p = _load_problem(args)
    report, converged = _fit_report(p, args)
    text = qio.dumps_json(report) if args.format == "json" else _fit_csv(report)
    _emit(text, args.output)
    return EXIT_OK if converged else EXIT_NONCONVERGED


def cmd_verify(args):
    p = _load_problem(args)
    check_x = qio.read_vector(args.check_x) if args.check_x else None
    if check_x is not None and check_x.shape[0] != p.a.shape[1]:
        raise InputError(f"--check-x has {check_x.shape[0]} entries, expected {p.a.shape[1]}")
    try:
        checks = run_equivalence_checks(p, args.kkt_tol, check_x)
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    passed = all(c.passed for c in checks)
    if args.format == "json":
        text = qio.dumps_json({"passed": passed, "checks": [c.as_dict() for c in checks]})
    else:
        rows = ["check,residual,tolerance,passed"]
        rows += [f"{c.name},{qio.fmt(c.residual)},{qio.fmt(c.tolerance)},{str(c.passed).lower()}" for c in checks]
        text = "\n".join(rows) + "\n"
    _emit(text, args.output)
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_path(args):
    if (args.t_grid is None) == (args.alpha_grid is None):
        raise InputError("give exactly one of --t-grid or --alpha-grid")
    try:
        if args.t_grid is not None:
            if not (args.a and args.b):
                raise InputError("--t-grid needs --a and --b")
            p = _load_problem(args)
            trace = path_over_rhs(p, parse_grid(args.t_grid), args.tol)
        else:
            if not (args.loss_matrix and args.center):
                raise InputError("--alpha-grid needs --loss-matrix and --center")
            q = qio.read_matrix(args.loss_matrix)
            center = qio.read_vector(args.center)
            lam = Problem(np.eye(center.shape[0]), center, _lambda(args)).lam
            trace = path_over_alpha(q, center, lam, parse_grid(args.alpha_grid), args.tol)
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED

    n = trace.points[0].x.shape[0]
    header = [trace.parameter_name] + [f"x{j}" for j in range(n)] + ["objective"]
    rhs = trace.parameter_name == "rhs_t"
    if rhs:
        header += [f"lambda1_{j}" for j in range(n)]
    rows = [",".join(header)]
    for pt in trace.points:
        cells = [qio.fmt(pt.value)] + [qio.fmt(v) for v in pt.x] + [qio.fmt(pt.objective)]
        if rhs:
            cells += [qio.fmt(v) for v in pt.lambda1]
        rows.append(",".join(cells))
    _emit("\n".join(rows) + "\n", args.output)
    return EXIT_OK


def cmd_fixture(args):
    fx = generate_fixture_data(args.seed, args.rows, args.cols, args.noise == "on", args.shrink_value)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "A.csv").write_text(qio.matrix_csv(fx.problem.a))
        (out / "b.csv").write_text(qio.vector_csv(fx.problem.b))
        (out / "lambda.csv").write_text(qio.vector_csv(fx.problem.lam))
        meta = {
            "seed": fx.seed,
            "rows": args.rows,
            "cols": args.cols,
            "noise": args.noise,
            "x_ini": fx.x_ini,
            "noise_factors": fx.noise,
        }
        (out / "fixture.json").write_text(qio.dumps_json(meta))
    except OSError as exc:
        raise InputError(f"cannot write fixture to {out}: {exc}") from None
    return EXIT_OK


def _add_problem_args(sp, required=True):
    sp.add_argument("--a", required=required, help="design matrix CSV (no header)")
    sp.add_argument("--b", required=required, help="response CSV, one value per line")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--lambda", dest="shrink", help="shrink value, or comma-separated per-column values")
    group.add_argument("--lambda-file", help="per-column shrink CSV, one value per line")
    sp.add_argument("--tol", type=float, default=None, help="solver tolerance")
    sp.add_argument("--kkt-tol", type=float, default=DEFAULT_KKT_TOL)
    sp.add_argument("--output", "-o", default=None, help="output file (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(prog="quadlasso", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit one model")
    _add_problem_args(fit)
    fit.add_argument("--model", choices=MODEL_TAGS, default="augmented")
    fit.add_argument("--t", type=float, default=0.0, help="response of the penalty row (augmented)")
    fit.add_argument("--signs", nargs="+", help="column signs for ridge_closed_form, e.g. + - +")
    fit.add_argument("--max-iter", type=int, default=None)
    fit.add_argument("--format", choices=("json", "csv"), default="json")
    fit.set_defaults(func=cmd_fit)

    verify = sub.add_parser("verify", help="run the equivalence and optimality checks")
    _add_problem_args(verify)
    verify.add_argument("--check-x", help="candidate solution CSV to test for optimality")
    verify.add_argument("--format", choices=("json", "csv"), default="json")
    verify.set_defaults(func=cmd_verify)

    path = sub.add_parser("path", help="solution path over t or alpha, written as CSV")
    _add_problem_args(path, required=False)
    path.add_argument("--t-grid", help="penalty-row responses, start:stop:count or comma list")
    path.add_argument("--alpha-grid", help="blend weights in [0, 1], start:stop:count or comma list")
    path.add_argument("--loss-matrix", help="symmetric positive definite loss matrix CSV (alpha path)")
    path.add_argument("--center", help="loss center CSV (alpha path)")
    path.set_defaults(func=cmd_path)

    fixture = sub.add_parser("fixture", help="write a seeded random problem")
    fixture.add_argument("--seed", type=int, required=True)
    fixture.add_argument("--out", default=".", help="output directory")
    fixture.add_argument("--rows", type=int, default=9)
    fixture.add_argument("--cols", type=int, default=7)
    fixture.add_argument("--noise", choices=("on", "off"), default="on")
    fixture.add_argument("--lambda", dest="shrink_value", type=float, default=0.5)
    fixture.set_defaults(func=cmd_fixture)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, OSError, ValueError, UnboundedDirectionError, RankDeficientError, NotPositiveDefiniteError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
