import json
from pathlib import Path

import pytest

from towline.cli import main
from towline.engine import GameRecord


def run(argv):
    return main(argv)


def test_solve_standard_writes_csv_and_header(tmp_path):
    assert run(["solve", "--x", "0.58", "--window=-8:8", "--form", "standard",
                "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "solution.csv").read_text().strip().splitlines()
    assert lines[0] == "i,a,b,m,n,phi"
    assert len(lines) == 1 + 17
    header = json.loads((tmp_path / "solution.json").read_text())
    assert header["battlefield"] == 0
    assert header["residual_max"] <= 1e-10
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["subcommand"] == "solve"
    assert set(manifest["outputs"]) == {"solution.csv", "solution.json"}


def test_solve_margin_header_at_three(tmp_path):
    run(["solve", "--x", "3", "--form", "standard", "--out", str(tmp_path)])
    header = json.loads((tmp_path / "solution.json").read_text())
    assert abs(header["mina_margin"] - 1.0) <= 1e-9


def test_solve_finite_trail(tmp_path):
    cen = repr(2.0 ** (2.0 ** 5.044937 - 1.0))
    assert run(["solve", "--x", cen, "--trail=-6:6", "--out", str(tmp_path)]) == 0
    header = json.loads((tmp_path / "solution.json").read_text())
    assert header["battlefield"] == 4
    lines = (tmp_path / "solution.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 11


def test_solve_usage_error(tmp_path):
    assert run(["solve", "--x", "-1", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        run(["solve", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_margin_roots_three(tmp_path):
    assert run(["margin", "--finite", "3,3", "--range=0.5:10", "--mesh", "1e-3",
                "--roots", "1.0", "--out", str(tmp_path)]) == 0
    roots = json.loads((tmp_path / "roots.json").read_text())
    assert roots["count"] == 3
    assert abs(roots["roots"][1] - 3.0) <= 1e-9
    curve = (tmp_path / "curve.csv").read_text().splitlines()
    assert curve[0] == "x,value"


def test_margin_psi_periodicity(tmp_path):
    assert run(["margin", "--psi", "--range=0:3", "--mesh", "0.25",
                "--out", str(tmp_path)]) == 0
    rows = [line.split(",") for line in
            (tmp_path / "curve.csv").read_text().strip().splitlines()[1:]]
    vals = {float(x): float(v) for x, v in rows}
    for z in (0.0, 0.5, 1.0, 1.5):
        assert abs(vals[z] - vals[z + 1.0]) <= 1e-6


def test_certify_exit_codes(capsys):
    assert run(["certify"]) == 0
    out = capsys.readouterr().out
    assert "0.9999032032" in out and "0.999904" in out
    assert run(["certify", "--json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["margin_interval"] == {"lo": "0.9999032032", "hi": "0.9999032038"}


def test_play_batch_zero_vs_zero(tmp_path):
    assert run(["play-batch", "--trail=-4:4", "--strategies", "zero:zero",
                "--runs", "4000", "--seed", "7", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert abs(summary["mean_payoff_minus"] - 0.5) <= 0.03
    lines = (tmp_path / "batch.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 4000


def test_play_batch_records_round_trip(tmp_path):
    assert run(["play-batch", "--trail=-3:3", "--strategies", "nash:bully",
                "--runs", "20", "--records", "5", "--seed", "3",
                "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "records.jsonl").read_text().strip().splitlines()
    assert len(rows) == 5
    for row in rows:
        rec = GameRecord.from_json(row)
        assert rec.to_json() == row


def test_play_batch_deterministic(tmp_path):
    a_dir = tmp_path / "a"
    b_dir = tmp_path / "b"
    for d in (a_dir, b_dir):
        assert run(["play-batch", "--trail=-3:3", "--strategies", "zero:zero",
                    "--runs", "500", "--seed", "11", "--out", str(d)]) == 0
    assert (a_dir / "batch.csv").read_bytes() == (b_dir / "batch.csv").read_bytes()
    ma = json.loads((a_dir / "manifest.json").read_text())
    mb = json.loads((b_dir / "manifest.json").read_text())
    assert ma["outputs"] == mb["outputs"]


def test_dabmn_sheet(tmp_path):
    assert run(["dabmn", "--preset", "plateau", "--K", "5", "--T", "600",
                "--stride", "20", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "sheet_summary.json").read_text())
    assert summary["maxima_counts"][0][1] == 2
    assert summary["maxima_counts"][-1][1] == 1
    lines = (tmp_path / "sheet.csv").read_text().strip().splitlines()
    assert lines[0] == "time,vertex,a,b,m,n"
    n_rows = len(summary["maxima_counts"])
    assert len(lines) == 1 + n_rows * (2 * 5 + 3)


def test_report_solution(tmp_path):
    assert run(["report", "--kind", "solution", "--x", "0.58",
                "--out", str(tmp_path)]) == 0
    assert (tmp_path / "solution.png").exists()
    assert (tmp_path / "solution.csv").exists()


def test_report_margin(tmp_path):
    assert run(["report", "--kind", "margin", "--finite", "3,3",
                "--range=0.5:8", "--mesh", "0.01", "--roots", "1.0",
                "--out", str(tmp_path)]) == 0
    assert (tmp_path / "margin.png").exists()
    assert (tmp_path / "curve.csv").exists()


def test_report_dabmn(tmp_path):
    assert run(["report", "--kind", "dabmn", "--K", "4", "--T", "200",
                "--stride", "100", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "sheet.png").exists()
    assert (tmp_path / "sheet.csv").exists()
