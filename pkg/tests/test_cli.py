import json
import subprocess
import sys

import pytest

from lphardy import __version__
from lphardy.cli import main
from lphardy.polyalg import MultiPoly, SeparableRational, one_plus_square_power
from lphardy.quadrature import bound_constant


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_norm_fixture(capsys):
    code, out, _ = run(["norm", "--fixture", "inverse-cube-lorentzian", "--p", "0.5"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["result"]["value"] == pytest.approx(2.0, abs=1e-6)
    assert doc["version"] == __version__
    assert doc["constants"]["C_np"] == pytest.approx(bound_constant(1, 0.5))
    assert doc["config"]["seed"] == 42


def test_norm_from_file(tmp_path, capsys):
    R = SeparableRational(MultiPoly.constant(1, 1.0), [one_plus_square_power(2)])
    path = tmp_path / "r.json"
    path.write_text(json.dumps(R.to_json()))
    out_path = tmp_path / "out.json"
    code, _, _ = run(["norm", str(path), "--p", "0.5", "--out", str(out_path)], capsys)
    assert code == 0
    assert json.loads(out_path.read_text())["result"]["converged"]


def test_schema_failure_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n": 1, "numerator": [{"index": [0], "re": "x"}], "denominators": [[{"re": 1.0}]]}))
    code, out, err = run(["norm", str(path), "--p", "0.5"], capsys)
    assert code == 2 and out == ""
    assert json.loads(err)["pointer"] == "/numerator/0/re"


def test_bad_p_exit_2(capsys):
    code, _, err = run(["norm", "--fixture", "inverse-cube-lorentzian", "--p", "1.5"], capsys)
    assert code == 2
    assert json.loads(err)["status"] == "invalid_input"


def test_certify_and_split(capsys):
    code, out, _ = run(["certify", "--fixture", "real-pair", "--p", "0.6"], capsys)
    assert code == 0
    code, out, _ = run(["split", "--fixture", "inverse-cube-lorentzian", "--p", "0.5", "--m", "5", "--phi", "0.4"], capsys)
    doc = json.loads(out)
    assert code == 0 and set(doc["result"]["components"]) == {"+", "-"}


def test_split_is_deterministic(capsys):
    args = ["split", "--fixture", "inverse-cube-lorentzian", "--p", "0.5", "--auto-phi"]
    _, a, _ = run(args, capsys)
    _, b, _ = run(args, capsys)
    assert a == b


def test_degenerate_phase_exit_2(capsys):
    code, _, err = run(["split", "--fixture", "inverse-cube-lorentzian", "--p", "0.5", "--m", "4", "--phi", "0.0"], capsys)
    assert code == 2
    assert json.loads(err)["error"] == "DegeneratePhase"


def test_density_demo_csv(capsys):
    code, out, _ = run(["density-demo", "--p", "0.5", "--N", "3", "--degrees", "2,4,8", "--target", "offset-pole"], capsys)
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "degree,sup_residual,lp_bound,lp_bound_as_printed"
    sups = [float(l.split(",")[1]) for l in lines[1:]]
    assert sups[0] > sups[1] > sups[2]


def test_xp_demo(capsys):
    code, out, _ = run(["xp-demo", "--p", "0.6"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["result"]["diff"]["max_reconstruction_gap"] <= 1e-10


def test_tolerance_profile_env(monkeypatch, capsys):
    monkeypatch.setenv("LPHARDY_TOL_PROFILE", "fast")
    _, out, _ = run(["norm", "--fixture", "inverse-cube-lorentzian", "--p", "0.5"], capsys)
    doc = json.loads(out)
    assert doc["config"]["tol_profile"] == "fast"
    assert doc["config"]["tol"] == pytest.approx(1e-6)
    monkeypatch.setenv("LPHARDY_TOL_PROFILE", "bogus")
    code, _, _ = run(["norm", "--fixture", "inverse-cube-lorentzian", "--p", "0.5"], capsys)
    assert code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "lphardy", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
