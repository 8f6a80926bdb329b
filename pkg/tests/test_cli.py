import json
import subprocess
import sys

import numpy as np
import pytest

from quadlasso.cli import main, parse_grid
from quadlasso.io import CsvFormatError, matrix_csv, read_matrix, read_vector, vector_csv


@pytest.fixture
def worked(tmp_path):
    (tmp_path / "A.csv").write_text("1,0\n0,1\n")
    (tmp_path / "b.csv").write_text("2\n3\n")
    return tmp_path


def _problem_args(d, shrink="1"):
    return ["--a", str(d / "A.csv"), "--b", str(d / "b.csv"), "--lambda", shrink]


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fit_augmented_worked(worked, capsys):
    code, out, _ = _run(["fit", "--model", "augmented"] + _problem_args(worked), capsys)
    report = json.loads(out)
    assert code == 0
    assert set(report) == {"model", "x", "objective", "kkt", "stats", "lambda1"}
    assert set(report["kkt"]) == {"stationarity", "primal", "dual", "complementarity"}
    np.testing.assert_allclose(report["x"], [1 / 3, 4 / 3], atol=1e-14)
    np.testing.assert_allclose(report["lambda1"], [5 / 3, 5 / 3], atol=1e-14)


def test_fit_nn_lasso_zero_shrink(worked, capsys):
    (worked / "b.csv").write_text("-1\n3\n")
    code, out, _ = _run(["fit", "--model", "nn_lasso"] + _problem_args(worked, "0"), capsys)
    assert code == 0
    np.testing.assert_allclose(json.loads(out)["x"], [0, 3], atol=1e-14)


def test_fit_ridge_closed_form_matches_augmented(worked, capsys):
    _, out, _ = _run(["fit", "--model", "ridge_closed_form", "--signs", "+", "+"] + _problem_args(worked), capsys)
    ridge = json.loads(out)
    _, out, _ = _run(["fit", "--model", "augmented"] + _problem_args(worked), capsys)
    np.testing.assert_allclose(ridge["x"], json.loads(out)["x"], atol=1e-14)


@pytest.mark.parametrize("model", ["nn_lasso", "free_lasso", "quadratic", "nn_ridge", "augmented"])
def test_fit_every_model_csv(worked, capsys, model):
    code, out, _ = _run(["fit", "--model", model, "--format", "csv"] + _problem_args(worked), capsys)
    assert code == 0
    rows = dict(line.split(",", 1) for line in out.strip().splitlines())
    assert rows["converged"] == "true"
    assert float(rows["kkt_stationarity"]) <= 1e-8


def test_fit_nonconvergence_exit_2(tmp_path, capsys):
    main(["fixture", "--seed", "3", "--out", str(tmp_path)])
    args = ["--a", str(tmp_path / "A.csv"), "--b", str(tmp_path / "b.csv"), "--lambda", "0.01"]
    code, out, _ = _run(["fit", "--model", "nn_lasso", "--max-iter", "1"] + args, capsys)
    assert code == 2
    assert json.loads(out)["stats"]["converged"] is False


def test_fit_malformed_csv(worked, capsys):
    (worked / "A.csv").write_text("1,0\n0,x\n")
    code, _, err = _run(["fit"] + _problem_args(worked), capsys)
    assert code == 1
    assert "row 2, column 2" in err


def test_fit_dimension_mismatch(worked, capsys):
    (worked / "b.csv").write_text("2\n3\n4\n")
    code, _, err = _run(["fit"] + _problem_args(worked), capsys)
    assert code == 1 and "rows" in err


def test_verify_worked(worked, capsys):
    code, out, _ = _run(["verify"] + _problem_args(worked), capsys)
    report = json.loads(out)
    assert code == 0 and report["passed"]
    assert max(c["residual"] for c in report["checks"]) <= 1e-10


def test_verify_corrupted_candidate(worked, capsys):
    (worked / "x.csv").write_text("2\n0\n")
    code, out, _ = _run(["verify", "--check-x", str(worked / "x.csv")] + _problem_args(worked), capsys)
    assert code == 3
    failed = [c["name"] for c in json.loads(out)["checks"] if not c["passed"]]
    assert failed == ["kkt_check_x"]


def test_verify_csv_table(worked, capsys):
    code, out, _ = _run(["verify", "--format", "csv"] + _problem_args(worked), capsys)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "check,residual,tolerance,passed"
    assert all(line.endswith(",true") for line in lines[1:])


def test_path_singleton_t_grid(worked, capsys):
    code, out, _ = _run(["path", "--t-grid", "0"] + _problem_args(worked), capsys)
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "rhs_t,x0,x1,objective,lambda1_0,lambda1_1"
    values = [float(v) for v in lines[1].split(",")]
    np.testing.assert_allclose(values[1:3], [1 / 3, 4 / 3], atol=1e-14)
    np.testing.assert_allclose(values[4:], [5 / 3, 5 / 3], atol=1e-14)


def test_path_alpha_fig2(tmp_path, capsys):
    (tmp_path / "Q.csv").write_text("1,0.7\n0.7,1\n")
    (tmp_path / "c.csv").write_text("2\n3\n")
    (tmp_path / "lam.csv").write_text(vector_csv([1 / 2, 1 / 3]))
    argv = ["path", "--alpha-grid", "0:1:101", "--loss-matrix", str(tmp_path / "Q.csv"),
            "--center", str(tmp_path / "c.csv"), "--lambda-file", str(tmp_path / "lam.csv")]
    code, out, _ = _run(argv, capsys)
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 102
    assert lines[0] == "alpha,x0,x1,objective"
    first = [float(v) for v in lines[1].split(",")]
    np.testing.assert_allclose(first[1:3], [512 / 351, 593 / 351], atol=1e-12)


def test_path_non_monotone_grid(worked, capsys):
    code, _, err = _run(["path", "--t-grid", "0,2,1"] + _problem_args(worked), capsys)
    assert code == 1 and "monotone" in err


def test_fixture_determinism_and_shape(tmp_path, capsys):
    for name in ("one", "two"):
        assert main(["fixture", "--seed", "42", "--out", str(tmp_path / name)]) == 0
    for f in ("A.csv", "b.csv", "lambda.csv", "fixture.json"):
        assert (tmp_path / "one" / f).read_bytes() == (tmp_path / "two" / f).read_bytes()
    a = read_matrix(tmp_path / "one" / "A.csv")
    assert a.shape == (9, 7)
    np.testing.assert_array_equal(read_vector(tmp_path / "one" / "lambda.csv"), np.full(7, 0.5))


def test_fixture_noise_off(tmp_path):
    main(["fixture", "--seed", "1", "--noise", "off", "--out", str(tmp_path)])
    a = read_matrix(tmp_path / "A.csv")
    b = read_vector(tmp_path / "b.csv")
    np.testing.assert_array_equal(b, a @ np.arange(1.0, 8.0))
    meta = json.loads((tmp_path / "fixture.json").read_text())
    assert meta["x_ini"] == [1, 2, 3, 4, 5, 6, 7]


def test_fixture_unwritable(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code, _, err = _run(["fixture", "--seed", "1", "--out", str(blocker / "sub")], capsys)
    assert code == 1 and "cannot write" in err


def test_csv_round_trip_is_lossless(tmp_path, rng):
    m = rng.normal(size=(4, 3)) * 1e3
    (tmp_path / "m.csv").write_text(matrix_csv(m))
    np.testing.assert_array_equal(read_matrix(tmp_path / "m.csv"), m)


def test_read_vector_rejects_rows(tmp_path):
    (tmp_path / "v.csv").write_text("1,2\n")
    with pytest.raises(CsvFormatError):
        read_vector(tmp_path / "v.csv")


@pytest.mark.parametrize("text, expected", [("0:1:3", [0, 0.5, 1]), ("1,2", [1, 2]), ("4", [4])])
def test_parse_grid(text, expected):
    np.testing.assert_allclose(parse_grid(text), expected)


def test_console_entry_point(worked):
    proc = subprocess.run(
        [sys.executable, "-m", "quadlasso.cli", "fit"] + _problem_args(worked),
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    np.testing.assert_allclose(json.loads(proc.stdout)["x"], [1 / 3, 4 / 3], atol=1e-14)
