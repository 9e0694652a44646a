import csv
from pathlib import Path

import pytest

from rescont.cli import EXIT_OK, main

pytestmark = [pytest.mark.integration, pytest.mark.slow]

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"

SP_AXIS_CONFIG = """
channels.l = [0, 1]
potential.strengths = [[7.0, 0.5], [0.5, 20.0]]
potential.continuation_index = [2, 2]
continuation.lambda_min = 5.5
continuation.lambda_max = 20.0
continuation.directions = [-1]
starts.k = [[0.0, 2.178012], [0.0, 0.9035406]]
"""


def test_roots_s_wave(capsys):
    assert main(["roots", "--config", str(CONFIG_DIR / "gauss_s.toml")]) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == ["2.185562e+00i"]


def test_roots_pd_table(capsys):
    assert main(["roots", "--config", str(CONFIG_DIR / "gauss_pd.toml")]) == EXIT_OK
    values = [float(line.rstrip("i")) for line in capsys.readouterr().out.splitlines()]
    assert values == pytest.approx([3.796532, 1.600083, 0.6599123], abs=1e-4)


def test_check_sp_passes(capsys):
    assert main(["check", "--config", str(CONFIG_DIR / "gauss_sp.toml")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "[FAIL]" not in out
    assert "[PASS] fd_oracle" in out


def test_check_square_well(capsys):
    main(["check", "--config", str(CONFIG_DIR / "square_well.toml")])
    assert "[PASS] square_well_oracle" in capsys.readouterr().out


def test_continue_flags_both_axis_branch_points(tmp_path, monkeypatch):
    monkeypatch.setenv("RESCONT_WORKERS", "2")
    config = tmp_path / "sp_axis.toml"
    config.write_text(SP_AXIS_CONFIG)
    output = tmp_path / "branches.csv"

    assert main(["continue", "--config", str(config), "--output", str(output)]) == EXIT_OK
    with open(output, newline="") as f:
        rows = list(csv.DictReader(f))

    flagged = sorted(float(row["lambda"]) for row in rows if row["flag"] == "branch_point")
    assert any(abs(lam - 6.091215) < 0.05 for lam in flagged), flagged
    assert any(abs(lam - 17.42094) < 0.05 for lam in flagged), flagged
    assert all(float(row["residual_norm"]) <= 1e-6 for row in rows)


def test_continue_output_is_reproducible(tmp_path):
    config = tmp_path / "s_wave.toml"
    config.write_text(
        "channels.l = [0]\npotential.strengths = [[7.0]]\n"
        "continuation.lambda_min = 6.0\ncontinuation.lambda_max = 7.0\n"
        "continuation.directions = [-1]\nstarts.k = [[0.0, 2.185562]]\n"
    )
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    assert main(["continue", "--config", str(config), "--output", str(first)]) == EXIT_OK
    assert main(["continue", "--config", str(config), "--output", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()

    with open(first, newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) > 2
    assert all(float(row["residual_norm"]) <= 1e-6 for row in rows if row["flag"] != "boundary")
