import socket
import subprocess
import sys
import time

import httpx
import pytest

from compint.cli import main

EXP_ARGS = ["--f", "exp(-s*t)", "--a", "0", "--b", "1", "--t", "1"]


def test_eval_fixed_mesh(capsys):
    code = main(["eval", *EXP_ARGS, "--n", "1024", "--tags", "left"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("value = 1.54")
    assert "mesh = 0.0009765625" in out


def test_eval_identity_interval(capsys):
    code = main(["eval", "--f", "t", "--a", "0", "--b", "0", "--t", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert "value = 3.0" in out


def test_eval_csv_schema(capsys):
    code = main(["eval", *EXP_ARGS, "--n", "16", "--format", "csv"])
    out = capsys.readouterr().out
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "n,mesh,value,abs_error,rel_error"
    cells = lines[1].split(",")
    assert cells[0] == "16"
    assert cells[3] == "nan" and cells[4] == "nan"


def test_converge_csv_deterministic(tmp_path):
    args = [
        "converge", *EXP_ARGS, "--n-min", "16", "--n-max", "1024",
        "--ref", "oracle", "--format", "csv",
    ]
    f1, f2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main([*args, "--output", str(f1)]) == 0
    assert main([*args, "--output", str(f2)]) == 0
    b1, b2 = f1.read_bytes(), f2.read_bytes()
    assert b1 == b2
    assert b"\r" not in b1
    text = b1.decode()
    lines = text.strip().split("\n")
    assert lines[0] == "n,mesh,value,abs_error,rel_error"
    assert lines[-1].startswith("# order=")
    # seven dyadic levels from 16 to 1024
    assert len(lines) == 1 + 7 + 1


def test_converge_table_output(capsys):
    code = main([
        "converge", "--f", "t", "--a", "0", "--b", "1", "--t", "1",
        "--n-min", "16", "--n-max", "256", "--ref", "case:exp_flow",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "fitted order = " in out
    assert "reference (case:exp_flow)" in out


def test_inverse_subcommand(capsys):
    code = main(["inverse", *EXP_ARGS, "--tol", "1e-6"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("value = ")


def test_subst_subcommand(capsys):
    code = main([
        "subst", *EXP_ARGS, "--gamma", "s^2", "--gamma-prime", "2*s",
        "--alpha", "0", "--beta", "1", "--n", "1024",
    ])
    assert code == 0
    assert "value = 1.5" in capsys.readouterr().out


def test_closed_form_subcommand(capsys):
    code = main(["closed-form", "--case", "exp_flow", "--a", "0", "--b", "1", "--t", "2"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("value = 5.43656365691809")

    code = main(["closed-form", "--case", "theorem2_exp_neg_st"])
    out = capsys.readouterr().out
    assert code == 0
    assert "oracle-backed" in out


def test_group_check_pass(capsys):
    code = main([
        "group-check", "--f", "exp(-s*t)", "--a", "0", "--b", "1",
        "--trials", "5", "--seed", "3", "--tol", "1e-6", "--t-min", "0",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS" in out


# --- exit codes -----------------------------------------------------------------


def test_exit_code_2_parse_error(capsys):
    code = main(["eval", "--f", "2*s + q", "--a", "0", "--b", "1", "--t", "1", "--n", "4"])
    assert code == 2
    assert "parse" in capsys.readouterr().err


def test_exit_code_2_bad_flags(capsys):
    assert main(["eval", "--a", "0"]) == 2  # missing required flags
    assert main(["nonsense"]) == 2
    # missing n/tol on a non-degenerate interval
    assert main(["eval", "--f", "t", "--a", "0", "--b", "1", "--t", "1"]) == 2


def test_exit_code_3_domain_error(capsys):
    code = main(["eval", "--f", "log(s - 2)", "--a", "0", "--b", "1", "--t", "1", "--n", "8"])
    assert code == 3
    assert "domain" in capsys.readouterr().err


def test_exit_code_4_state_escape(capsys):
    code = main(["eval", "--f", "t*t", "--a", "0", "--b", "1", "--t", "3", "--n", "64"])
    assert code == 4
    assert "state_escape" in capsys.readouterr().err


def test_exit_code_5_no_convergence(capsys):
    code = main([
        "eval", *EXP_ARGS, "--tol", "1e-12", "--n0", "16", "--n-max", "32",
    ])
    assert code == 5
    assert "no_convergence" in capsys.readouterr().err


def test_exit_code_6_audit_failure(capsys):
    code = main([
        "group-check", "--f", "exp(-s*t)", "--a", "0", "--b", "1",
        "--trials", "2", "--seed", "1", "--tol", "1e-12", "--n0", "16", "--n-max", "32",
    ])
    assert code == 6
    assert "FAIL" in capsys.readouterr().out


def test_module_entrypoint_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "compint", "eval", "--f", "t", "--a", "0", "--b", "0", "--t", "3"],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0
    assert "value = 3.0" in proc.stdout


# --- remote mode -----------------------------------------------------------------


@pytest.fixture(scope="module")
def server_url():
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        port = sock.getsockname()[1]
    proc = subprocess.Popen(
        [sys.executable, "-m", "uvicorn", "compint.service.app:app",
         "--host", "127.0.0.1", "--port", str(port), "--log-level", "warning"],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    url = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                if httpx.get(url + "/health", timeout=1.0).status_code == 200:
                    break
            except httpx.TransportError:
                time.sleep(0.2)
        else:
            pytest.skip("service did not come up")
        yield url
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_remote_matches_local(server_url, capsys):
    args = ["eval", *EXP_ARGS, "--n", "256"]
    assert main(args) == 0
    local_out = capsys.readouterr().out
    assert main([*args, "--server", server_url]) == 0
    remote_out = capsys.readouterr().out
    assert remote_out == local_out


def test_remote_error_mapping(server_url, capsys):
    code = main([
        "eval", "--f", "2*s + q", "--a", "0", "--b", "1", "--t", "1",
        "--n", "4", "--server", server_url,
    ])
    assert code == 2
    code = main([
        "eval", "--f", "t*t", "--a", "0", "--b", "1", "--t", "3",
        "--n", "64", "--server", server_url,
    ])
    assert code == 4
