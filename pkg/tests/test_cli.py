import csv
import io
import json
import subprocess
import sys

import pytest

from sphcap import cli
from sphcap.capacity import TableComparison, TableRow


def run_cli(capsys, *argv):
    code = cli.run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_capacity_kappa_zero(capsys):
    code, out, _ = run_cli(capsys, "capacity", "--kappa", "0", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1
    assert float(rows[0]["alpha_u"]) == pytest.approx(2.0, abs=1e-9)
    assert float(rows[0]["alpha_u_low"]) == pytest.approx(2.0, abs=1e-9)


def test_csv_header_order_and_trailing_newline(capsys):
    code, out, _ = run_cli(capsys, "capacity", "--kappa", "0", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "kappa,alpha_u,alpha_u_low,c3_opt,gamma_opt,residual"
    assert out.endswith("\n")


def test_json_round_trip_ten_significant_digits(capsys):
    code, out, _ = run_cli(capsys, "capacity", "--kappa", "-0.65", "--format", "json")
    assert code == 0
    assert out.endswith("\n")
    payload = json.loads(out)
    assert len(payload) == 1
    rec = payload[0]
    assert set(rec) == {"kappa", "alpha_u", "alpha_u_low", "c3_opt", "gamma_opt", "residual"}
    for key, value in rec.items():
        assert float(f"{value:.10g}") == value


def test_byte_identical_reruns(capsys):
    args = ("empirical", "--kappa", "0", "--alpha", "1.2", "--n", "30",
            "--trials", "3", "--seed", "7", "--format", "csv")
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2


def test_bound_eval_fixed_gamma(capsys):
    code, out, _ = run_cli(
        capsys, "bound-eval", "--c3", "1.1266", "--alpha", "12.784",
        "--kappa", "-1", "--gamma-per", "0.2922", "--format", "json",
    )
    assert code == 0
    rec = json.loads(out)[0]
    assert rec["gamma_per"] == 0.2922
    assert abs(rec["lower_bound"]) <= 1e-3


def test_bound_eval_optimized_gamma(capsys):
    code, out, _ = run_cli(
        capsys, "bound-eval", "--c3", "0", "--alpha", "4", "--kappa", "0",
        "--format", "json",
    )
    assert code == 0
    rec = json.loads(out)[0]
    assert rec["lower_bound"] == pytest.approx(2 ** 0.5 - 1, abs=1e-9)


def test_sweep_grid(capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--kappa-start", "-0.52", "--kappa-stop", "-0.5",
        "--kappa-step", "0.01", "--format", "csv",
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["kappa"]) for r in rows] == pytest.approx([-0.52, -0.51, -0.5])
    lows = [float(r["alpha_u_low"]) for r in rows]
    assert lows[0] > lows[1] > lows[2]


def test_usage_errors_exit_2(capsys):
    assert run_cli(capsys, "capacity")[0] == 2                     # missing --kappa
    assert run_cli(capsys, "no-such-command")[0] == 2
    assert run_cli(capsys, "capacity", "--kappa", "nan")[0] == 2
    assert run_cli(capsys, "empirical", "--kappa", "0", "--alpha", "1.5",
                   "--n", "1")[0] == 2
    code, _, err = run_cli(capsys, "sweep", "--kappa-start", "0.5",
                           "--kappa-stop", "-0.5")
    assert code == 2 and "usage error" in err


def test_numeric_failure_exit_3_with_structured_record(capsys):
    code, _, err = run_cli(
        capsys, "bound-eval", "--c3", "1", "--alpha", "5", "--kappa", "0",
        "--gamma-per", "-0.5",
    )
    assert code == 3
    record = json.loads(err.strip().splitlines()[-1])
    assert record["error"] == "ValueError"
    assert "gamma_per" in record["message"]


def test_output_file_atomic_write(tmp_path, capsys, monkeypatch):
    target = tmp_path / "out.csv"
    code, out, _ = run_cli(capsys, "capacity", "--kappa", "0", "--format", "csv",
                           "--output", str(target))
    assert code == 0 and out == ""
    text = target.read_text()
    assert text.endswith("\n") and text.startswith("kappa,")
    leftovers = [p for p in tmp_path.iterdir() if p.name != "out.csv"]
    assert leftovers == []


def test_output_dir_env_var(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    code, _, _ = run_cli(capsys, "capacity", "--kappa", "0", "--format", "json",
                         "--output", "rel.json")
    assert code == 0
    assert (tmp_path / "rel.json").exists()


def test_tables_text_rendering():
    comparison = TableComparison(
        rows=[
            TableRow(-0.7, "alpha_u", 7.0448, 7.04483),
            TableRow(-0.7, "alpha_u_low", 7.0313, 7.03122),
            TableRow(-0.7, "c3_opt", 0.2555, 0.25550),
            TableRow(-0.7, "gamma_opt", 0.4402, 0.44019),
        ]
    )
    text = cli._tables_text(comparison)
    lines = text.splitlines()
    assert lines[0].split() == ["quantity", "-0.7"]
    assert any(line.startswith("alpha_u_low (computed)") for line in lines)
    assert lines[-1].startswith("max |dev|")


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sphcap", "capacity", "--kappa", "0", "--format", "csv"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("kappa,")
