import csv
import io
import json
import subprocess
import sys

import pytest

from annulab import cli, params, shape
from annulab.errors import SolverError
from annulab.geometry import SpaceForm
from annulab.oracle import radial_J, radial_lambda1

from conftest import check_row


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_spherical_matches_oracle(capsys):
    code, out, _ = run(capsys, "solve", "--geom", "sph", "--r0", "0.3", "--r1", "1.0", "--t", "0", "--L", "3")
    assert code == cli.EXIT_OK
    rep = json.loads(out)
    assert rep["geometry"] == "sph" and rep["L"] == 3
    ref = radial_J(SpaceForm.SPHERICAL, 0.3, 1.0)
    assert abs(rep["J"] - ref) / ref < 1e-3
    assert rep["energy_identity_residual"] < 1e-9
    assert rep["mesh_stats"]["triangles"] == 512 * 4**3


def test_solve_euclidean_eigenvalue(capsys):
    code, out, _ = run(capsys, "solve", "--geom", "euc", "--r0", "0.5", "--r1", "1.0")
    assert code == 0
    ref = radial_lambda1(SpaceForm.EUCLIDEAN, 0.5, 1.0)
    assert abs(json.loads(out)["lambda1"] - ref) / ref < 5e-3


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--geom", "sph", "--r1", "1.0"],
        ["solve", "--geom", "sph", "--r0", "1.0", "--r1", "0.3"],
        ["solve", "--geom", "sph", "--r0", "0.3", "--r1", "1.0", "--t", "0.7"],
        ["solve", "--geom", "xyz", "--r0", "0.3", "--r1", "1.0"],
        ["sweep", "--geom", "hyp", "--r0", "0.3", "--r1", "1.0", "--t-grid", "0:0.7:0.1"],
        ["sweep", "--geom", "hyp", "--r0", "0.3", "--r1", "1.0", "--t-grid", "0:0.5"],
        ["convergence", "--geom", "euc", "--r0", "0.5", "--r1", "1.0", "--L", "2"],
        ["solve", "--geom", "sph", "--r0", "0.3", "--r1", "1.0", "--t", "0.1", "--t-grid", "0:0.2:0.1"],
        ["solve", "--geom", "sph", "--r0", "0.3", "--r1", "1.0", "--L", "-1"],
    ],
)
def test_invalid_configuration_exits_2(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == cli.EXIT_CONFIG
    assert out == ""


def test_missing_setting_is_named(capsys):
    _, _, err = run(capsys, "solve", "--geom", "sph", "--r1", "1.0")
    assert "--r0" in err


def test_validation_precedes_compute(capsys, monkeypatch):
    def boom(*a, **k):
        raise AssertionError("compute reached")

    monkeypatch.setattr(cli, "sweep", boom)
    code, _, _ = run(capsys, "sweep", "--geom", "sph", "--r0", "0.3", "--r1", "1.0", "--t-grid", "0:0.8:0.1")
    assert code == cli.EXIT_CONFIG


def test_solver_failure_exits_3(capsys, monkeypatch):
    def fail(*a, **k):
        raise SolverError("factorisation failed")

    monkeypatch.setattr(cli, "solve_torsion", fail)
    code, out, err = run(capsys, "solve", "--geom", "hyp", "--r0", "0.3", "--r1", "1.0", "--L", "0")
    assert code == cli.EXIT_SOLVER
    assert "factorisation failed" in err and out == ""


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"geom": "hyp", "r0": 0.3, "r1": 1.0, "t": 0.2, "L": 1}))
    _, out, _ = run(capsys, "solve", "--config", str(cfg))
    base = json.loads(out)
    assert base["geometry"] == "hyp" and base["t"] == 0.2 and base["L"] == 1
    _, out, _ = run(capsys, "solve", "--config", str(cfg), "--t", "0.0")
    over = json.loads(out)
    assert over["t"] == 0.0 and over["J"] < base["J"]


def test_config_file_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"geom": "hyp", "r0": 0.3, "r1": 1.0, "mesh": "fine"}))
    code, _, err = run(capsys, "solve", "--config", str(cfg))
    assert code == cli.EXIT_CONFIG and "mesh" in err
    code, _, _ = run(capsys, "solve", "--config", str(tmp_path / "absent.json"))
    assert code == cli.EXIT_CONFIG


def test_sweep_csv(capsys):
    argv = ["sweep", "--geom", "sph", "--r0", "0.3", "--r1", "1.0", "--t-grid", "0.3:0.4:0.05", "--L", "3"]
    code, out, err = run(capsys, *argv)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == shape.SWEEP_COLUMNS
    assert [float(r[3]) for r in rows[1:]] == [0.3, 0.35, 0.4]
    # the middle row is the acceptance check row, printed with 12 significant digits
    mid = dict(zip(rows[0], rows[2]))
    ref = check_row(SpaceForm.SPHERICAL)
    assert mid["J"] == "%.12g" % ref.J
    assert mid["dlam_bnd"] == "%.12g" % ref.dlam_bnd
    assert err.count("t=") == 3
    _, again, _ = run(capsys, *argv)
    assert again == out


def test_sweep_to_file(tmp_path, capsys):
    path = tmp_path / "sweep.csv"
    code, out, _ = run(
        capsys, "sweep", "--geom", "euc", "--r0", "0.3", "--r1", "1.0", "--t-grid", "0:0.2:0.1", "--L", "0", "--out", str(path)
    )
    assert code == 0 and out == ""
    lines = path.read_text().splitlines()
    assert len(lines) == 4 and lines[0].startswith("geom,")


def test_convergence_csv(capsys):
    code, out, _ = run(capsys, "convergence", "--geom", "euc", "--r0", "0.5", "--r1", "1.0", "--L", "4")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][0] == "L"
    assert [r[0] for r in rows[1:]] == ["2", "3", "4", "order"]
    order = dict(zip(rows[0], rows[-1]))
    assert order["h"] == "" and order["J"] == ""
    lo, hi = params.ORDER_RANGE
    assert lo <= float(order["err_lambda1"]) <= hi


def test_oracle_json(capsys):
    code, out, _ = run(capsys, "oracle", "--geom", "sph", "--r0", "0.3", "--r1", "1.0")
    assert code == 0
    rep = json.loads(out)
    assert rep["C"] == pytest.approx(-0.8143315302527122, abs=1e-13)
    assert rep["lambda1"] == pytest.approx(19.12798341841455, rel=1e-9)
    assert rep["u_samples"][0]["u"] == pytest.approx(0.0, abs=1e-14)
    assert len(rep["u_samples"]) == 5


def test_no_subcommand_is_a_config_error(capsys):
    assert cli.main([]) == cli.EXIT_CONFIG


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "annulab", "oracle", "--geom", "euc", "--r0", "0.5", "--r1", "1.0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["geometry"] == "euc"
