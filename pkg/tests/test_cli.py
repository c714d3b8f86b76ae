"""End-to-end tests of the command-line application."""

import json

import pytest

from gimvip.app import GimvipApp
from gimvip.exceptions import EXIT_INPUT_ERROR, EXIT_OK, EXIT_VERDICT_FAILURE

from .conftest import PROBLEMS_DIR


@pytest.fixture
def cli(tmp_path, capsys):
    """Run the app with artifacts under tmp_path; returns (exit code, stdout JSON or None)."""

    def invoke(*argv, out_dir=True):
        args = list(argv)
        if out_dir:
            args += ["--out-dir", str(tmp_path)]
        code = GimvipApp().run(args)
        out = capsys.readouterr().out.strip()
        return code, (json.loads(out.splitlines()[-1]) if out else None)

    return invoke


def test_version(capsys):
    assert GimvipApp().run(["--version"]) == EXIT_OK
    assert "gimvip" in capsys.readouterr().out


def test_usage_error():
    assert GimvipApp().run(["validate"]) == 2
    assert GimvipApp().run([]) == 2


def test_validate(cli, tmp_path):
    code, summary = cli("validate", "--builtin", "example1")
    assert code == EXIT_OK
    assert summary["passed"] is True
    assert summary["m"] == pytest.approx(0.5)
    assert (tmp_path / "constants.json").is_file()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "validate"


def test_validate_override_fails_verdict(cli):
    code, summary = cli("validate", "--builtin", "example1", "--override", "alpha=10")
    assert code == EXIT_VERDICT_FAILURE
    assert summary["passed"] is False


def test_validate_bad_override(cli):
    code, _ = cli("validate", "--builtin", "example1", "--override", "alpha")
    assert code == EXIT_INPUT_ERROR


def test_validate_shipped_file(cli):
    code, summary = cli("validate", "--problem", str(PROBLEMS_DIR / "l1_box3.json"))
    assert code == EXIT_OK
    assert summary["cond_iii_lhs"] == pytest.approx(0.9)


def test_bad_problem_file(cli, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dimension": 1, "F": {"type": "scalar_linear"}}')
    code = GimvipApp().run(["validate", "--problem", str(bad), "--out-dir", str(tmp_path)])
    assert code == EXIT_INPUT_ERROR
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert "error" in error


def test_missing_problem_file(cli, tmp_path):
    code, _ = cli("validate", "--problem", str(tmp_path / "absent.json"))
    assert code == EXIT_INPUT_ERROR


def test_simulate(cli, tmp_path):
    code, summary = cli(
        "simulate",
        "--builtin",
        "example1",
        "--regime",
        "finite",
        "--w0",
        "50",
        "--dt",
        "0.01",
        "--t-max",
        "40",
        "--settle-tol",
        "1e-8",
    )
    assert code == EXIT_OK
    assert summary["settled"] is True
    assert summary["bound_respected"] is True
    assert summary["observed"] < summary["predicted_bound"]
    assert (tmp_path / "trajectory.csv").is_file()
    assert (tmp_path / "report.json").is_file()


def test_simulate_bad_step(cli):
    code, _ = cli("simulate", "--builtin", "example1", "--dt", "5", "--t-max", "1")
    assert code == EXIT_INPUT_ERROR


def test_solve_and_plot(cli, tmp_path):
    code, summary = cli(
        "solve", "--builtin", "example1", "--method", "alg2", "--theta", "0.2", "--iters", "150"
    )
    assert code == EXIT_OK
    assert abs(summary["final_w"][0]) <= 1e-3

    svg = tmp_path / "chart.svg"
    code, summary = cli("plot", str(tmp_path / "trajectory.csv"), str(svg), out_dir=False)
    assert code == EXIT_OK
    assert summary["output"] == str(svg)
    assert svg.read_text(encoding="utf-8").startswith("<?xml")


@pytest.mark.parametrize("schedule", ["paper", "harmonic"])
def test_solve_decreasing_schedule(cli, tmp_path, schedule):
    code, summary = cli(
        "solve",
        "--builtin",
        "example1",
        "--method",
        "eq29",
        "--k3",
        "1",
        "--iters",
        "150",
        "--schedule",
        schedule,
    )
    assert code == EXIT_OK
    assert abs(summary["final_w"][0]) <= 1e-3
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["method"]["schedule"]["kind"] == "harmonic"


def test_solve_without_iterations(cli, tmp_path):
    code, summary = cli("solve", "--builtin", "example1", "--method", "alg2", "--iters", "0")
    assert code == EXIT_OK
    assert summary["samples"] == 1
    assert summary["final_w"] == [50.0]
    rows = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert len(rows) == 2


def test_simulate_short_horizon_warns(tmp_path, capsys):
    argv = ["simulate", "--builtin", "example1", "--regime", "finite", "--t-max", "1e-6"]
    code = GimvipApp().run(argv + ["--out-dir", str(tmp_path)])
    captured = capsys.readouterr()
    assert code == EXIT_OK
    summary = json.loads(captured.out.strip().splitlines()[-1])
    assert summary["settled"] is False
    assert summary["observed"] is None
    assert summary["bound_respected"] is True
    assert "did not settle" in captured.err


def test_plot_single_row(cli, tmp_path):
    single = tmp_path / "single.csv"
    single.write_text("t,w_0,xi_norm\n0,50,34\n")
    svg = tmp_path / "single.svg"
    code, _ = cli("plot", str(single), str(svg), out_dir=False)
    assert code == EXIT_OK
    assert "<circle" in svg.read_text(encoding="utf-8")


def test_plot_header_only_csv(cli, tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("t,w_0,xi_norm\n")
    svg = tmp_path / "empty.svg"
    code, _ = cli("plot", str(empty), str(svg), out_dir=False)
    assert code == EXIT_INPUT_ERROR
    assert not svg.exists()


def test_plot_malformed_csv(cli, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    code, _ = cli("plot", str(bad), str(tmp_path / "out.svg"), out_dir=False)
    assert code == EXIT_INPUT_ERROR


def test_certify(cli, tmp_path):
    code, summary = cli("certify", "--builtin", "example1", "--samples", "500", "--point", "12")
    assert code == EXIT_OK
    assert summary["passed"] is True
    assert "residual_lower_printed" in summary["failed"]
    assert (tmp_path / "certificate.json").is_file()


def test_unknown_bench(cli):
    code, _ = cli("bench", "nonexistent")
    assert code == EXIT_INPUT_ERROR


@pytest.mark.slow
def test_bench(cli, tmp_path):
    code, summary = cli("bench", "example1")
    assert code == EXIT_OK
    assert summary["rows"] == 7
    header = (tmp_path / "bench.csv").read_text().splitlines()[0]
    assert header.startswith("name,kind,final_w")
    assert (tmp_path / "alg2_k2" / "trajectory.csv").is_file()
