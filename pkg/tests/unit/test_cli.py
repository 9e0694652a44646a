import csv

import pytest

from rescont._version import __version__
from rescont.branch import ContinuationPoint
from rescont.checks import CheckResult
from rescont.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, build_parser, main
from rescont.exceptions import NoConvergenceError
from rescont.rootfinding import RootResult

S_WAVE_CONFIG = """
channels.l = [0]
potential.strengths = [[7.0]]
continuation.lambda_min = 5.0
continuation.lambda_max = 9.0
continuation.directions = [-1]
"""


def write_config(tmp_path, text: str = S_WAVE_CONFIG):
    path = tmp_path / "run.toml"
    path.write_text(text)
    return path


def fake_trace(model, start, lambda0, direction, bounds, grid, options, collector):
    branch = collector.new_branch()
    for i, flag in enumerate(("start", "regular", "boundary")):
        branch.add_point(
            ContinuationPoint(
                x=[0.0, start.k.imag - 0.01 * i, lambda0 + direction * 0.01 * i],
                tangent=[0.0, -0.1, direction],
                residual_norm=1e-9,
                flag=flag,
            )
        )
    branch.stop_reason = "lambda_bound"
    return branch


class TestParser:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            build_parser().parse_args(["--version"])
        assert exc_info.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_config_is_required(self):
        with pytest.raises(SystemExit) as exc_info:
            build_parser().parse_args(["roots"])
        assert exc_info.value.code == 2

    def test_subcommand_options(self, tmp_path):
        args = build_parser().parse_args(
            ["continue", "--config", "run.toml", "--output", str(tmp_path / "b.csv"), "--verbose"]
        )
        assert args.command == "continue"
        assert args.verbose
        assert args.output == tmp_path / "b.csv"

    def test_map_subcommand(self):
        assert build_parser().parse_args(["map", "--config", "run.toml"]).command == "map"


class TestMain:
    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["roots", "--config", str(tmp_path / "absent.toml")]) == EXIT_CONFIG
        assert "configuration error" in capsys.readouterr().err

    def test_invalid_config_names_field(self, tmp_path, capsys):
        path = write_config(tmp_path, "channels.l = [0]\npotential.strengths = [[7.0]]\ngrid.r_max = 2.0\n")
        assert main(["roots", "--config", str(path)]) == EXIT_CONFIG
        assert "grid.r_max" in capsys.readouterr().err

    def test_invalid_environment(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("RESCONT_WORKERS", "0")
        assert main(["roots", "--config", str(write_config(tmp_path))]) == EXIT_CONFIG
        assert "environment" in capsys.readouterr().err

    def test_roots_prints_table(self, tmp_path, mocker, capsys):
        mocker.patch(
            "rescont.cli.scan_bound_states",
            return_value=[RootResult(2.185562j, 1e-9, 4, "bound")],
        )
        assert main(["roots", "--config", str(write_config(tmp_path))]) == EXIT_OK
        assert capsys.readouterr().out.splitlines() == ["2.185562e+00i"]

    def test_roots_writes_csv(self, tmp_path, mocker):
        mocker.patch(
            "rescont.cli.scan_bound_states",
            return_value=[RootResult(2.185562j, 1e-9, 4, "bound")],
        )
        output = tmp_path / "roots.csv"
        main(["roots", "--config", str(write_config(tmp_path)), "--output", str(output)])
        with open(output, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[1][2] == "2.18556200e+00"

    def test_explicit_starts_use_newton(self, tmp_path, mocker, capsys):
        scan = mocker.patch("rescont.cli.scan_bound_states")
        newton = mocker.patch(
            "rescont.cli.newton_complex", return_value=RootResult(2.185562j, 1e-9, 4, "bound")
        )
        path = write_config(tmp_path, S_WAVE_CONFIG + "starts.k = [[0.0, 2.2]]\n")
        assert main(["roots", "--config", str(path)]) == EXIT_OK
        scan.assert_not_called()
        assert newton.call_args.args[2] == 2.2j

    def test_numerical_failure_exit_code(self, tmp_path, mocker, capsys):
        mocker.patch(
            "rescont.cli.newton_complex",
            side_effect=NoConvergenceError("no", 2.2j, 50, 1e-2),
        )
        path = write_config(tmp_path, S_WAVE_CONFIG + "starts.k = [[0.0, 2.2]]\n")
        assert main(["roots", "--config", str(path)]) == EXIT_NUMERICAL
        assert "numerical failure" in capsys.readouterr().err

    def test_continue_writes_branch_csv(self, tmp_path, mocker, capsys):
        mocker.patch(
            "rescont.cli.scan_bound_states",
            return_value=[RootResult(2.185562j, 1e-9, 4, "bound")],
        )
        mocker.patch("rescont.cli.trace_branch", side_effect=fake_trace)
        assert main(["continue", "--config", str(write_config(tmp_path))]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "branch_id,point_index,lambda,re_k,im_k,residual_norm,flag"
        assert len(lines) == 4
        assert lines[-1].endswith(",boundary")

    def test_continue_merges_parallel_runs(self, tmp_path, mocker, monkeypatch):
        monkeypatch.setenv("RESCONT_WORKERS", "2")
        mocker.patch(
            "rescont.cli.scan_bound_states",
            return_value=[
                RootResult(2.185562j, 1e-9, 4, "bound"),
                RootResult(0.5j, 1e-9, 4, "bound"),
            ],
        )
        mocker.patch("rescont.cli.trace_branch", side_effect=fake_trace)
        output = tmp_path / "branches.csv"
        path = write_config(tmp_path, S_WAVE_CONFIG.replace("[-1]", "[-1, 1]"))
        assert main(["continue", "--config", str(path), "--output", str(output)]) == EXIT_OK
        with open(output, newline="") as f:
            rows = list(csv.reader(f))[1:]
        assert sorted({row[0] for row in rows}) == ["0", "1", "2", "3"]
        assert len(rows) == 12

    def test_failed_branch_is_logged_not_fatal(self, tmp_path, mocker, capsys):
        mocker.patch(
            "rescont.cli.scan_bound_states",
            return_value=[RootResult(2.185562j, 1e-9, 4, "bound")],
        )
        mocker.patch(
            "rescont.cli.trace_branch",
            side_effect=NoConvergenceError("no", 2.2j, 50, 1e-2),
        )
        assert main(["continue", "--config", str(write_config(tmp_path))]) == EXIT_OK
        assert capsys.readouterr().out.splitlines() == [
            "branch_id,point_index,lambda,re_k,im_k,residual_norm,flag"
        ]

    def test_check_exit_code_reflects_failures(self, tmp_path, mocker, capsys):
        mocker.patch("rescont.cli.scan_bound_states", return_value=[])
        mocker.patch(
            "rescont.cli.run_checks",
            return_value=[CheckResult("unitarity", True, "ok"), CheckResult("fd_oracle", False, "off")],
        )
        assert main(["check", "--config", str(write_config(tmp_path))]) == EXIT_NUMERICAL
        captured = capsys.readouterr()
        assert "[FAIL] fd_oracle: off" in captured.out
        assert "fd_oracle" in captured.err

    def test_check_all_passing(self, tmp_path, mocker):
        mocker.patch("rescont.cli.scan_bound_states", return_value=[])
        mocker.patch("rescont.cli.run_checks", return_value=[CheckResult("unitarity", True, "ok")])
        assert main(["check", "--config", str(write_config(tmp_path))]) == EXIT_OK

    def test_map_writes_determinant_table(self, tmp_path):
        path = write_config(
            tmp_path,
            S_WAVE_CONFIG + "map.re_min = 0.5\nmap.re_max = 1.0\nmap.n_re = 2\n"
            "map.im_min = -0.2\nmap.im_max = 0.2\nmap.n_im = 3\n",
        )
        output = tmp_path / "map.csv"
        assert main(["map", "--config", str(path), "--output", str(output)]) == EXIT_OK
        with open(output, newline="") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 6
        assert [float(rows[i]["im_k"]) for i in (0, 2, 4)] == [-0.2, 0.0, 0.2]
        # |det S| = 1 on the real axis
        assert float(rows[2]["abs_det_s"]) == pytest.approx(1.0, abs=1e-6)

    def test_map_reports_bad_rectangle(self, tmp_path, capsys):
        path = write_config(tmp_path, S_WAVE_CONFIG + "map.n_re = 1\n")
        assert main(["map", "--config", str(path)]) == EXIT_CONFIG
        assert "map.n_re" in capsys.readouterr().err
