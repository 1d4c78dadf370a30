import csv
import io
import json
import os
import subprocess
import sys

import pytest

from halfweight.cli import main
from halfweight.fourier import gram, iter_records, loads, siegel_phi, theta_lattice
from halfweight.hecke import hecke_apply, sp_cosets


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def run_json(capsys, *argv):
    rc, out, err = run(capsys, *argv)
    assert rc == 0, err
    return json.loads(out)


def records_of(f):
    return json.loads(json.dumps([{"tau2": r["tau2"], "coeff": str(r["coeff"])} for r in iter_records(f)]))


# ---------------------------------------------------------------- exit codes

@pytest.mark.parametrize("argv", [
    [],
    ["theta", "--gram", "e8"],
    ["ladder", "--n", "2", "--k", "x", "--p", "2"],
    ["ladder", "--n", "2", "--k", "1/3", "--p", "2"],
    ["rho-tau", "--n", "2", "--tau2", "1,a;a,1"],
    ["gauss", "--char", "nonsense"],
    ["phi"],
    ["phi", "--gram", "e8", "--input", "x.txt"],
    ["--threads", "0", "gauss", "--char", "4:1"],
])
def test_usage_errors_exit_2(capsys, argv):
    rc, out, _ = run(capsys, *argv)
    assert rc == 2
    assert out == ""


@pytest.mark.parametrize("argv", [
    ["hecke", "--gram", "rank1", "--degree", "1", "--trace-bound", "4", "--p", "3"],
    ["theta", "--gram", "nosuchlattice", "--degree", "1", "--trace-bound", "2"],
    ["satake-check", "--p", "2"],
])
def test_compute_errors_exit_1_with_record(capsys, argv):
    rc, out, _ = run(capsys, *argv)
    assert rc == 1
    rec = json.loads(out)
    assert set(rec) == {"error", "type"} and rec["error"]


# ---------------------------------------------------------------- subcommands

def test_theta_matches_library(capsys):
    got = run_json(capsys, "theta", "--gram", "e8", "--degree", "2", "--trace-bound", "3")
    f = theta_lattice(gram("e8"), 2, 3)
    assert got["degree"] == 2 and got["weight2"] == f.weight2 and got["trunc"] == 3
    assert got["records"] == records_of(f)


def test_theta_csv(capsys):
    rc, out, _ = run(capsys, "--csv", "theta", "--gram", "rank1", "--degree", "1", "--trace-bound", "4")
    assert rc == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(json.loads(r["tau2"]), r["coeff"]) for r in rows] == [([[0]], "1"), ([[2]], "2"), ([[8]], "2")]


def test_theta_out_roundtrip_through_phi_and_hecke(capsys, tmp_path):
    path = tmp_path / "e8.txt"
    run_json(capsys, "theta", "--gram", "e8", "--degree", "1", "--trace-bound", "8", "--out", str(path))
    f = theta_lattice(gram("e8"), 1, 8)
    assert loads(path.read_text()) == f

    phi = run_json(capsys, "phi", "--input", str(path))
    assert phi["records"] == records_of(siegel_phi(f))

    hk = run_json(capsys, "hecke", "--input", str(path), "--p", "2", "--eigen")
    data = sp_cosets(1, 2, None)
    assert hk["records"] == records_of(hecke_apply(f, data))
    assert hk["cosets"] == 6
    assert hk["eigenvalue"] == "69/4"


def test_exponents_example(capsys):
    got = run_json(capsys, "exponents", "--n", "2", "--k", "13/2", "--m", "9/2")
    assert got["c_m_closed_form_ok"] is True
    assert got["k"] == "13/2" and got["m"] == "9/2"


def test_gauss(capsys):
    got = run_json(capsys, "gauss", "--char", "4:1")
    assert got["gauss_sum"] == {"level": 4, "coords": ["0", "2"]}
    assert got["abs_squared"] == "4" and got["conductor"] == 4


def test_gauss_jacobi(capsys):
    got = run_json(capsys, "gauss", "--char", "5:2", "--jacobi", "5:2")
    assert got["jacobi_sum"] == "-1"


def test_rho_tau(capsys):
    got = run_json(capsys, "rho-tau", "--n", "2", "--tau2", "2,1;1,2")
    assert got["character"] == "3:1" and got["parity"] == -1


def test_omega(capsys):
    got = run_json(capsys, "omega", "--n", "1", "--k", "13/2", "--which", "Omega+")
    assert got["sets"] == {"Omega+": ["5/2", "9/2", "13/2"]}


def test_ladder(capsys):
    got = run_json(capsys, "ladder", "--n", "2", "--k", "4", "--p", "2", "--params", "1/8")
    assert got["ok"] is True and got["params"] == ["1/8", "1/4"]
    bad = run_json(capsys, "ladder", "--n", "2", "--k", "4", "--p", "2", "--params", "1/8", "--last", "1/2")
    assert bad["ok"] is False


def test_satake_check(capsys):
    got = run_json(capsys, "satake-check", "--n", "1", "--p", "3", "--M", "3")
    assert got["ok"] is True and len(got["records"]) == 4
    sq = run_json(capsys, "satake-check", "--n", "1", "--p", "3", "--square")
    assert sq["ok"] is True


def test_lfun_params_file(capsys, tmp_path):
    # parameters all 1 at n = 1 give zeta(s - 1)^2 over the listed primes
    path = tmp_path / "params.txt"
    path.write_text("2: 1\n3: 1\n")
    got = run_json(capsys, "lfun", "--params-file", str(path), "--n", "1", "--s", "4")
    want = 1 / ((1 - 2 ** -3) ** 2 * (1 - 3 ** -3) ** 2)
    assert got["value"]["re"] == pytest.approx(want, rel=1e-12) and got["value"]["im"] == 0
    assert got["primes"] == 2


def test_project_delta(capsys):
    got = run_json(capsys, "project", "--trace-bound", "5")
    assert got["idempotent"] is True


def test_petersson_positive(capsys):
    got = run_json(capsys, "petersson", "--nx", "16", "--ny", "20", "--trace-bound", "20")
    assert got["value"]["re"] > 0


def test_threads_do_not_change_output(capsys):
    argv = ["theta", "--gram", "e8", "--degree", "2", "--trace-bound", "2"]
    one = run(capsys, "--threads", "1", *argv)
    two = run(capsys, "--threads", "2", *argv)
    assert one == two and one[0] == 0


# ---------------------------------------------------------------- process-level behaviour

def test_module_entry_point_and_cache_dir(tmp_path):
    env = dict(os.environ, HALFWEIGHT_CACHE_DIR=str(tmp_path))
    cmd = [sys.executable, "-m", "halfweight", "hecke", "--gram", "e8", "--degree", "1",
           "--trace-bound", "4", "--p", "3"]
    proc = subprocess.run(cmd, env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["cosets"] == 12
    assert any(tmp_path.iterdir())


def test_module_entry_point_usage_error():
    proc = subprocess.run([sys.executable, "-m", "halfweight", "omega"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert "usage" in proc.stderr
