"""CLI: grammar, JSON schemas, solve/verify round trips, exit codes."""
import json
import os
import subprocess
import sys

from affinetoda.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_lie_info_a2(capsys):
    code, out, _ = run_cli(capsys, "lie", "info", "A2")
    assert code == 0
    data = json.loads(out)
    assert data["exponents"] == [1, 2]
    assert data["coxeter_number"] == 3
    assert data["marks"] == [1, 1, 1]
    assert data["positive_root_count"] == 3
    assert data["x_coefficients"] == ["1", "1"]


def test_lie_info_schema_stable(capsys):
    code, out, _ = run_cli(capsys, "lie", "info", "G2")
    data = json.loads(out)
    assert sorted(data.keys()) == [
        "comarks",
        "coxeter_number",
        "exponents",
        "marks",
        "positive_root_count",
        "type",
        "x_coefficients",
    ]


def test_lie_check_passes(capsys):
    code, out, _ = run_cli(capsys, "lie", "check", "B2")
    assert code == 0
    data = json.loads(out)
    assert data["pass"] is True
    assert data["checks"]["jacobi_exact"]["pass"] is True


def test_lie_restrict_e6(capsys):
    code, out, _ = run_cli(capsys, "lie", "restrict", "E6")
    assert code == 0
    assert json.loads(out)["label"] == "F4(1)"


def test_unknown_type_exits_2(capsys):
    code, _, err = run_cli(capsys, "lie", "info", "Z9")
    assert code == 2
    assert "error" in err


def test_unknown_subcommand_exits_2(capsys):
    code = main(["lie", "frobnicate", "A2"])
    assert code == 2


def test_toda_solve_verify_round_trip(tmp_path, capsys):
    out_path = str(tmp_path / "omega.bin")
    code, out, _ = run_cli(
        capsys,
        "toda", "solve", "--type", "A1", "--grid", "32x32", "--q", "const:1.0",
        "--tol", "1e-10", "--out", out_path,
    )
    assert code == 0
    summary = json.loads(out)
    assert summary["converged"] is True
    assert summary["residual"] < 1e-10
    assert os.path.exists(out_path)
    assert os.path.exists(out_path + ".manifest.json")

    code2, out2, _ = run_cli(capsys, "toda", "verify", out_path)
    assert code2 == 0
    verify = json.loads(out2)
    assert verify["pass"] is True
    # recomputed residual is bit-identical to the reported one
    assert verify["drift"]["residual"] == 0.0
    assert verify["residual"] == summary["residual"]


def test_toda_solve_config_file(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("type=A1\ngrid=16x16\nq=const:1.0\ninit=oracle\n")
    out_path = str(tmp_path / "omega.bin")
    code, out, _ = run_cli(capsys, "toda", "solve", "--config", str(conf), "--out", out_path)
    assert code == 0
    assert json.loads(out)["converged"] is True


def test_toda_solve_flag_overrides_config(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("type=A1\ngrid=16x16\n")
    out_path = str(tmp_path / "omega.bin")
    code, out, _ = run_cli(
        capsys, "toda", "solve", "--config", str(conf), "--type", "A2", "--out", out_path
    )
    assert code == 0
    manifest = json.load(open(out_path + ".manifest.json"))
    assert manifest["config"]["type"] == "A2"


def test_verify_detects_tampering(tmp_path, capsys):
    out_path = str(tmp_path / "omega.bin")
    run_cli(capsys, "toda", "solve", "--type", "A1", "--grid", "16x16", "--out", out_path)
    # corrupt one payload byte
    data = bytearray(open(out_path, "rb").read())
    data[-5] ^= 0xFF
    open(out_path, "wb").write(bytes(data))
    code, out, _ = run_cli(capsys, "toda", "verify", out_path)
    assert code == 1
    assert json.loads(out)["pass"] is False


def test_conn_check_a2(capsys):
    code, out, _ = run_cli(capsys, "conn", "check", "--type", "A2", "--grid", "32", "--q", "const:1.0")
    assert code == 0
    data = json.loads(out)
    assert data["pass"] is True
    assert data["checks"]["psi_equals_phi_star"]["pass"] is True
    assert data["checks"]["zero_curvature_equivalence"]["pass"] is True


def test_export_plot(tmp_path, capsys):
    out_path = str(tmp_path / "omega.bin")
    run_cli(capsys, "toda", "solve", "--type", "A2", "--grid", "16x16", "--out", out_path)
    csv_path = str(tmp_path / "plot.csv")
    code, out, _ = run_cli(capsys, "export-plot", out_path, "--out", csv_path)
    assert code == 0
    lines = open(csv_path).read().splitlines()
    assert lines[0] == "ix,iy,x,y,alpha1,alpha2,residual_norm"
    assert len(lines) == 1 + 16 * 16


def test_manifest_contents(tmp_path, capsys):
    out_path = str(tmp_path / "omega.bin")
    run_cli(capsys, "toda", "solve", "--type", "A1", "--grid", "16x16", "--out", out_path)
    manifest = json.load(open(out_path + ".manifest.json"))
    assert manifest["command"] == "toda solve"
    assert manifest["conventions"]["root_order"] == "height-then-lex"
    assert "summary" in manifest and "config" in manifest


def test_bad_threads_env_exits_2(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("TODA_THREADS", "zero")
    code, _, err = run_cli(capsys, "toda", "solve", "--type", "A1", "--grid", "16x16",
                           "--out", str(tmp_path / "o.bin"))
    assert code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "affinetoda", "lie", "info", "A1"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["coxeter_number"] == 2
