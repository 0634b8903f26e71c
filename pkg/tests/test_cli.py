"""End-to-end tests for the command-line front end."""

import csv
import json

import pytest

from src.cli.main import build_parser, join_option_values, main
from src.core.singular_set import pl_sequence
from src.models.reports import Provenance
from src.utils.errors import UsageError


def _stderr_payload(capsys):
    """Last stderr line holds the JSON error document."""
    lines = [line for line in capsys.readouterr().err.splitlines() if line.strip()]
    return json.loads(lines[-1])


@pytest.fixture
def solved(tmp_path, capsys):
    """Solve the singular forcing preset into a temporary directory."""
    out = tmp_path / "solve"
    code = main(["solve", "--preset", "singular-forcing", "--output-dir", str(out), "--log-level", "ERROR"])
    outputs = json.loads(capsys.readouterr().out)
    return code, out, outputs


class TestParser:
    """Tests for argument parsing."""

    def test_flags_are_optional(self):
        """Test that unset flags do not appear in the namespace."""
        args = vars(build_parser().parse_args(["spectrum", "--count", "3"]))

        assert args == {"command": "spectrum", "count": 3}

    def test_unknown_command(self):
        """Test that parse errors raise a usage error with exit status 2."""
        with pytest.raises(UsageError, match="invalid choice") as excinfo:
            build_parser().parse_args(["bend"])

        assert excinfo.value.exit_code == 2

    def test_values_starting_with_minus(self):
        """Test that expression and force values may begin with a minus sign."""
        tokens = join_option_values(["solve", "--g", "-cos(11*x)", "--P", "-3", "--x0=0.4"])

        assert tokens == ["solve", "--g=-cos(11*x)", "--P=-3", "--x0=0.4"]
        args = vars(build_parser().parse_args(tokens))
        assert args["g"] == "-cos(11*x)"
        assert args["P"] == "-3"

    def test_usage_error_is_json(self, capsys):
        """Test that argparse failures reach stderr as an error document."""
        code = main(["solve", "--samples", "many"])
        payload = _stderr_payload(capsys)

        assert code == 2
        assert payload["error"] == "UsageError"
        assert "--samples" in payload["detail"]


class TestSolveCommand:
    """Tests for the solve subcommand."""

    def test_outputs(self, solved):
        """Test exit status and written files."""
        code, out, outputs = solved

        assert code == 0
        assert set(outputs) == {"u", "report"}
        assert (out / "solve_u.csv").exists()
        assert (out / "solve_report.json").exists()

    def test_csv(self, solved):
        """Test the x,u,side layout with x0 on both sides."""
        _, out, _ = solved
        with (out / "solve_u.csv").open(encoding="utf-8") as f:
            rows = list(csv.reader(f))

        assert rows[0] == ["x", "u", "side"]
        at_interface = [row for row in rows[1:] if float(row[0]) == 0.5]
        assert sorted(row[2] for row in at_interface) == ["minus", "plus"]

    def test_report(self, solved):
        """Test the JSON report fields."""
        _, out, _ = solved
        report = json.loads((out / "solve_report.json").read_text(encoding="utf-8"))

        assert report["schema"] == 1
        assert report["command"] == "solve"
        assert report["jump_ratio"] == pytest.approx(2.0, rel=1e-8)
        assert report["expected_jump_ratio"] == 2.0
        assert report["weak_residual"] <= 1e-6
        assert report["problem"]["singularities"] == [{"location": pytest.approx(2 / 3), "exponent": -0.5}]
        moments = report["moments"]
        imbalance = moments["minus"] - moments["plus"]
        assert imbalance == pytest.approx(report["interface_laws"]["value"], abs=1e-15)
        assert moments["minus"] == pytest.approx(moments["plus"], rel=1e-8, abs=1e-12)

    def test_deterministic(self, tmp_path, capsys):
        """Test byte-identical output for identical inputs."""
        args = ["solve", "--A", "2", "--B", "1", "--x0", "0.4", "--P", "-3"]
        args += ["--g", "sin(3*x)+1", "--displacement"]
        for name in ("one", "two"):
            assert main([*args, "--output-dir", str(tmp_path / name), "--log-level", "ERROR"]) == 0
        capsys.readouterr()

        for file in ("solve_u.csv", "solve_report.json", "solve_w.csv"):
            assert (tmp_path / "one" / file).read_bytes() == (tmp_path / "two" / file).read_bytes()

    def test_expression_with_leading_minus(self, tmp_path, capsys):
        """Test the singular load passed as a separate argument starting with '-'."""
        g = "-cos(11*x)/sqrt(abs(x-2/3))"
        args = ["solve", "--A", "1", "--B", "2", "--x0", "1/2", "--P", "1"]
        args += ["--g", g, "--sing", "2/3:-1/2"]

        code = main([*args, "--output-dir", str(tmp_path), "--log-level", "ERROR"])
        report = json.loads((tmp_path / "solve_report.json").read_text(encoding="utf-8"))

        assert code == 0
        assert report["problem"]["g"] == g
        assert report["jump_ratio"] == pytest.approx(2.0, rel=1e-8)
        moments = report["moments"]
        assert moments["minus"] == pytest.approx(moments["plus"], rel=1e-8, abs=1e-12)

    def test_equal_stiffness(self, tmp_path, capsys):
        """Test exit status 2 and the error document for A == B."""
        code = main(["solve", "--A", "2", "--B", "2", "--P", "1", "--output-dir", str(tmp_path)])
        payload = _stderr_payload(capsys)

        assert code == 2
        assert payload["error"] == "ValidationError"
        assert payload["exit_code"] == 2

    def test_syntax_error(self, tmp_path, capsys):
        """Test that a bad forcing expression reports its position."""
        code = main(["solve", "--P", "1", "--g", "2x", "--output-dir", str(tmp_path)])
        payload = _stderr_payload(capsys)

        assert code == 2
        assert payload["error"] == "ExpressionSyntaxError"
        assert payload["position"] == 1

    def test_singular_force(self, tmp_path, capsys, fresh_settings):
        """Test exit status 3 at a singular constant force."""
        fresh_settings.setenv("DISTBEAM_SINGULAR_THRESHOLD", "1e-6")
        entry = next(e for e in pl_sequence(1.0, 2.0, 0.5, 6).entries if e.provenance is Provenance.Z1)
        args = ["solve", "--A", "1", "--B", "2", "--x0", "0.5", "--P", repr(entry.p)]

        code = main([*args, "--output-dir", str(tmp_path)])
        payload = _stderr_payload(capsys)

        assert code == 3
        assert payload["error"] == "SingularParameterError"
        assert payload["scale"] > 0.0


class TestOtherCommands:
    """Tests for spectrum, product-check and residual."""

    def test_spectrum(self, tmp_path, capsys):
        """Test the singular force report."""
        code = main(["spectrum", "--count", "5", "--output-dir", str(tmp_path), "--log-level", "ERROR"])
        report = json.loads((tmp_path / "spectrum.json").read_text(encoding="utf-8"))

        assert code == 0
        assert len(report["entries"]) == 5
        assert {e["provenance"] for e in report["entries"]} <= {"Z0", "Z1"}

    def test_product_check(self, tmp_path, capsys):
        """Test [H-·delta] = delta/2 with the default mollifier."""
        code = main(
            ["product-check", "--pair", "Hminus,delta", "--output-dir", str(tmp_path), "--log-level", "ERROR"]
        )
        report = json.loads((tmp_path / "product_check.json").read_text(encoding="utf-8"))

        assert code == 0
        assert report["verdict"] == "Converged"
        assert report["coefficient"] == pytest.approx(0.5, abs=1e-6)

    def test_product_check_help_states_sign(self, capsys):
        """Test that the help text gives the sign of the Heaviside-delta products."""
        with pytest.raises(SystemExit) as excinfo:
            main(["product-check", "--help"])

        assert excinfo.value.code == 0
        assert "+psi(x0)/2" in capsys.readouterr().out

    def test_residual_of_stored_report(self, solved, tmp_path, capsys):
        """Test re-checking the stored coefficients."""
        _, out, _ = solved
        code = main(
            ["residual", "--report", str(out / "solve_report.json"), "--output-dir", str(tmp_path / "check")]
        )
        report = json.loads((tmp_path / "check" / "residual.json").read_text(encoding="utf-8"))

        assert code == 0
        assert report["weak_residual"] <= 1e-6
        assert abs(report["interface_laws"]["value"]) <= 1e-9

    def test_missing_report(self, tmp_path, capsys):
        """Test that residual requires --report."""
        code = main(["residual", "--output-dir", str(tmp_path)])

        assert code == 2
        assert "--report" in _stderr_payload(capsys)["detail"]

    def test_nonexistent_report(self, tmp_path, capsys):
        """Test exit status 2 for a report path that does not exist."""
        code = main(["residual", "--report", str(tmp_path / "nope.json"), "--output-dir", str(tmp_path)])
        payload = _stderr_payload(capsys)

        assert code == 2
        assert payload["error"] == "PreconditionError"
        assert "cannot read" in payload["detail"]

    def test_malformed_report(self, tmp_path, capsys):
        """Test exit status 2 for a report that is not JSON."""
        path = tmp_path / "bad.json"
        path.write_text("{bad", encoding="utf-8")

        code = main(["residual", "--report", str(path), "--output-dir", str(tmp_path)])
        payload = _stderr_payload(capsys)

        assert code == 2
        assert payload["error"] == "PreconditionError"
        assert "not valid JSON" in payload["detail"]

    def test_report_without_coefficients(self, tmp_path, capsys):
        """Test exit status 2 for JSON that is not a solve report."""
        path = tmp_path / "other.json"
        path.write_text(json.dumps({"command": "spectrum"}), encoding="utf-8")

        code = main(["residual", "--report", str(path), "--output-dir", str(tmp_path)])

        assert code == 2
        assert "not a solve report" in _stderr_payload(capsys)["detail"]

    def test_trace(self, tmp_path, capsys):
        """Test the zero-set report and polyline CSV."""
        args = ["trace", "--window", "0.1,8,0.1,8", "--grid-n", "32"]

        code = main([*args, "--output-dir", str(tmp_path), "--log-level", "ERROR"])
        report = json.loads((tmp_path / "trace.json").read_text(encoding="utf-8"))
        header = (tmp_path / "trace.csv").read_text(encoding="utf-8").splitlines()[0]

        assert code == 0
        assert report["plane"] == "M_prime"
        assert report["curves"]
        assert header == "curve,s,t,P1,P2"

    def test_regularize(self, tmp_path, capsys):
        """Test the convergence table and one grid CSV per width."""
        args = ["regularize", "--preset", "compressed-soft-right", "--eps", "1/10,1/20", "--n", "1000"]

        code = main([*args, "--output-dir", str(tmp_path), "--log-level", "ERROR"])
        report = json.loads((tmp_path / "regularize_table.json").read_text(encoding="utf-8"))

        assert code == 0
        assert [row["eps"] for row in report["rows"]] == [pytest.approx(0.1), pytest.approx(0.05)]
        assert not any(row["failed"] for row in report["rows"])
        assert (tmp_path / "regularize_eps1.csv").exists()
