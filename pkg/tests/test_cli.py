import json

import numpy as np
import pytest

from interlace import cli
from interlace.errors import ConditioningError, InvalidInputError, ParseError
from interlace.linalg import residual_matrix, spectral_norm
from interlace.problem import GcrssProblem


def write_csv(path, M):
    path.write_text("\n".join(",".join(repr(float(v)) for v in row) for row in np.atleast_2d(M)) + "\n")
    return str(path)


def run_json(capsys, argv):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


class TestParseMatrix:
    def test_csv_identity(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,0\n0,1\n")
        np.testing.assert_array_equal(cli.parse_matrix(p), np.eye(2))

    def test_csv_header_comment(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("# col0,col1\n1,2\n3,4\n")
        np.testing.assert_array_equal(cli.parse_matrix(p), [[1, 2], [3, 4]])

    def test_csv_ragged(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,2\n3\n")
        with pytest.raises(ParseError) as err:
            cli.parse_matrix(p)
        assert err.value.line == 2

    def test_csv_non_numeric(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,2\n3,x\n")
        with pytest.raises(ParseError) as err:
            cli.parse_matrix(p)
        assert err.value.line == 2

    @pytest.mark.parametrize("token", ["nan", "inf", "-inf"])
    def test_nonfinite(self, tmp_path, token):
        p = tmp_path / "a.csv"
        p.write_text(f"1,{token}\n")
        with pytest.raises(InvalidInputError):
            cli.parse_matrix(p)

    def test_matrix_market_array_column_major(self, tmp_path):
        p = tmp_path / "a.mtx"
        p.write_text("%%MatrixMarket matrix array real general\n% comment\n2 2\n1\n3\n2\n4\n")
        np.testing.assert_array_equal(cli.parse_matrix(p), [[1, 2], [3, 4]])

    def test_matrix_market_coordinate(self, tmp_path):
        p = tmp_path / "a.mtx"
        p.write_text("%%MatrixMarket matrix coordinate real general\n2 3 2\n1 3 5.0\n2 1 -1\n")
        np.testing.assert_array_equal(cli.parse_matrix(p), [[0, 0, 5], [-1, 0, 0]])

    def test_matrix_market_bad_index(self, tmp_path):
        p = tmp_path / "a.mtx"
        p.write_text("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n")
        with pytest.raises(ParseError) as err:
            cli.parse_matrix(p)
        assert err.value.line == 3

    def test_matrix_market_symmetric_rejected(self, tmp_path):
        p = tmp_path / "a.mtx"
        p.write_text("%%MatrixMarket matrix array real symmetric\n1 1\n1\n")
        with pytest.raises(ParseError):
            cli.parse_matrix(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidInputError):
            cli.parse_matrix(tmp_path / "absent.csv")


class TestSelect:
    def test_gcss_worked_example(self, tmp_path, capsys):
        A = write_csv(tmp_path / "A.csv", np.diag([1.0, 2.0]))
        B = write_csv(tmp_path / "B.csv", np.eye(2))
        code, report, _ = run_json(capsys, ["select", "--mode", "gcss", "--A", A, "--B", B, "-k", "1", "--eta", "1e-8"])
        assert code == 0
        sel = report["selection"]
        assert sel["S"] == [1] and sel["R"] == []
        assert sel["residual_spectral_sq"] == pytest.approx(1.0)
        assert sel["maxroot_bound"] == pytest.approx(2.5, abs=1e-8)
        assert report["version"] and report["run_spec"]["k"] == 1
        assert report["timings"]["wall_seconds"] >= 0

    def test_round_trip_residual(self, tmp_path, rng):
        M = {name: rng.standard_normal(shape) for name, shape in (("A", (4, 4)), ("B", (4, 5)), ("C", (3, 4)))}
        paths = {name: write_csv(tmp_path / f"{name}.csv", m) for name, m in M.items()}
        out = tmp_path / "report.json"
        code = cli.main(
            ["select", "--A", paths["A"], "--B", paths["B"], "--C", paths["C"], "-k", "2", "-r", "1", "--out", str(out)]
        )
        assert code == 0
        sel = json.loads(out.read_text())["selection"]
        assert sel["S"] == sorted(sel["S"]) and sel["R"] == sorted(sel["R"])
        prob = GcrssProblem(M["A"], M["B"], M["C"], 2, 1)
        again = spectral_norm(residual_matrix(prob, sel["S"], sel["R"])) ** 2
        assert again == pytest.approx(sel["residual_spectral_sq"], rel=1e-10)

    def test_submatrix_reports_both_conventions(self, tmp_path, capsys):
        A = write_csv(tmp_path / "A.csv", np.eye(2))
        code, report, _ = run_json(capsys, ["select", "--mode", "submatrix", "--A", A, "-k", "1", "-r", "1"])
        assert code == 0
        sel = report["selection"]
        assert sel["submatrix_norm"] == 0.0
        assert sel["submatrix_rows"] != sel["submatrix_cols"]
        assert sorted(sel["submatrix_rows"] + sel["internal_S"]) == [0, 1]

    def test_path_override(self, tmp_path, capsys):
        A = write_csv(tmp_path / "A.csv", np.diag([1.0, 2.0]))
        B = write_csv(tmp_path / "B.csv", np.eye(2))
        argv = ["select", "--mode", "gcss", "--A", A, "--B", B, "-k", "1", "--path", "definition"]
        code, report, _ = run_json(capsys, argv)
        assert code == 0 and report["selection"]["path"] == "definition"


class TestBound:
    def test_submatrix_zero(self, tmp_path, capsys):
        A = write_csv(tmp_path / "A.csv", np.zeros((4, 4)))
        code, report, _ = run_json(capsys, ["bound", "--mode", "submatrix", "--A", A, "-k", "1"])
        assert code == 0
        assert report["bounds"]["bound_submatrix"] == pytest.approx(0.25)

    def test_gcss(self, tmp_path, capsys, rng):
        A = write_csv(tmp_path / "A.csv", rng.standard_normal((5, 3)))
        B = write_csv(tmp_path / "B.csv", rng.standard_normal((5, 4)))
        code, report, _ = run_json(capsys, ["bound", "--mode", "gcss", "--A", A, "--B", B, "-k", "2"])
        assert code == 0
        assert report["expected_poly_maxroot"] >= 0
        assert 0 <= report["bounds"]["alpha"] <= 1


class TestVerify:
    def test_seed_zero_passes(self, capsys):
        code, report, _ = run_json(capsys, ["verify", "--seed", "0", "--instances", "10", "--eta", "1e-8"])
        assert code == 0 and report["all_passed"]
        assert set(report["verify"]) == {"sandwich", "path_equivalence", "symmetry", "real_rootedness", "monotonicity"}
        assert all(c["instances"] == 10 for c in report["verify"].values())

    def test_failing_property_exits_one(self, capsys, monkeypatch):
        fake = {"verify": {"sandwich": {"passed": False, "worst_slack": 1.0, "instances": 1}}, "all_passed": False}
        monkeypatch.setattr(cli, "_verify", lambda spec: fake)
        code, report, _ = run_json(capsys, ["verify"])
        assert code == 1 and not report["all_passed"]


class TestExitCodes:
    def test_missing_input(self, capsys):
        code, _, err = run_json(capsys, ["select", "--mode", "gcss", "--A", "x.csv"])
        assert code == 2
        assert json.loads(err)["error"]

    def test_parse_error(self, tmp_path, capsys):
        p = tmp_path / "A.csv"
        p.write_text("1,2\n3\n")
        code, _, err = run_json(capsys, ["select", "--mode", "css", "--A", str(p), "-k", "1"])
        assert code == 2
        assert "line 2" in json.loads(err)["message"]

    def test_nonsquare_submatrix(self, tmp_path, capsys):
        A = write_csv(tmp_path / "A.csv", np.ones((2, 3)))
        code, _, _ = run_json(capsys, ["select", "--mode", "submatrix", "--A", A, "-k", "1", "-r", "1"])
        assert code == 2

    def test_order_too_large(self, tmp_path, capsys):
        A = write_csv(tmp_path / "A.csv", np.eye(2))
        code, _, _ = run_json(capsys, ["select", "--mode", "css", "--A", A, "-k", "3"])
        assert code == 2

    def test_numerical_failure(self, capsys, monkeypatch):
        def boom(spec):
            raise ConditioningError("synthetic")

        monkeypatch.setattr(cli, "run", boom)
        code, _, err = run_json(capsys, ["verify"])
        assert code == 3
        assert json.loads(err)["message"] == "synthetic"
