import json
import subprocess
import sys

import pytest

from affgaudin.cli import run
from affgaudin.serialize import load_schema, load_spec, validate

AFF = {"model": "shift_argument_affine", "algebra": "sl2_affine", "sites": [0], "levels": [3], "weights": [[2]],
       "shift": [2], "counts": {"0": 1, "1": 1}, "solver": {"seeds": 8}}


def write(tmp_path, doc, name="spec.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def report(tmp_path, argv):
    out = tmp_path / "out.json"
    code = run(argv + ["--out", str(out)])
    return code, json.loads(out.read_text())


def test_schema_is_valid_json_schema():
    import jsonschema

    jsonschema.Draft202012Validator.check_schema(load_schema())


def test_validate_ok(tmp_path):
    code, rep = report(tmp_path, ["validate", "--spec", write(tmp_path, AFF)])
    assert code == 0 and rep["diagnostics"] == []


@pytest.mark.parametrize("patch,msg", [
    ({"model": "regular_singularities", "algebra": "sl2", "sites": [0, 0], "weights": [[1], [1]],
      "shift": None}, "sites must be pairwise distinct"),
    ({"model": "shift_argument_finite", "algebra": "sl3", "weights": [[1, 1]], "shift": [1, -1], "levels": [],
      "counts": {}}, "shift is not regular"),
])
def test_validate_diagnostics(tmp_path, patch, msg):
    doc = {**AFF, **patch}
    doc = {k: v for k, v in doc.items() if v is not None}
    code, rep = report(tmp_path, ["validate", "--spec", write(tmp_path, doc)])
    assert code == 1 and any(msg in d for d in rep["diagnostics"])


def test_schema_pointer(tmp_path):
    diags = validate({**AFF, "levels": ["x"]})
    assert diags and diags[0].startswith("/levels/0")
    code, rep = report(tmp_path, ["solve-bethe", "--spec", write(tmp_path, {**AFF, "levels": ["x"]})])
    assert code == 1 and rep["diagnostics"]


def test_solve_empty(tmp_path):
    code, rep = report(tmp_path, ["solve-bethe", "--spec", write(tmp_path, {**AFF, "counts": {}})])
    assert code == 0 and rep["solve"]["solutions"] == [{"roots": []}]


def test_check_monodromy(tmp_path):
    csv = tmp_path / "t.csv"
    code, rep = report(tmp_path, ["check-monodromy", "--spec", write(tmp_path, AFF), "--csv", str(csv)])
    assert code == 0 and rep["verdict"] == "PASS"
    assert rep["monodromy"]["max_wronskian_deviation"] < 1e-8
    assert csv.read_text().startswith("solution,w,radius,lambda")


def test_check_monodromy_custom_grid(tmp_path):
    code, rep = report(tmp_path, ["check-monodromy", "--spec", write(tmp_path, AFF), "--lambda-grid", "0,2i"])
    assert code == 0 and len(rep["monodromy"]["scans"][0]["lambda_grid"]) == 2


def test_rational_kdv(tmp_path):
    code, rep = report(tmp_path, ["rational-kdv", "--m0", "3"])
    assert code == 0 and rep["classes"][0]["shape"] == "equilateral_triangle"
    assert rep["classes"][0]["amm_residual"] < 1e-12
    code, rep = report(tmp_path, ["rational-kdv", "--m0", "2"])
    assert code == 0 and rep["empty"]


def test_coset_check(tmp_path):
    code, rep = report(tmp_path, ["coset-check", "--k1", "1", "--k2", "1", "--grade", "2"])
    assert code == 0 and rep["identity_exact"] and rep["central_charge"] == "1/2"
    assert set(rep["predicted_residues"]) == {0, "1/2"}


def test_map_blz(tmp_path):
    code, rep = report(tmp_path, ["map-blz", "--ell", "1/3", "--k", "1/2", "--m", "2"])
    assert code == 0 and len(rep["blz"]) == 2


def test_gaudin_spectrum(tmp_path):
    doc = {"model": "regular_singularities", "algebra": "sl2", "sites": [0, 1], "weights": [[1], [1]],
           "counts": {"1": 1}}
    code, rep = report(tmp_path, ["gaudin-spectrum", "--spec", write(tmp_path, doc)])
    assert code == 0 and rep["sum_zero"] and rep["spectra"]["Xi_0"] == [-0.5, -0.5, -0.5, 1.5]


def test_dmt_commute(tmp_path):
    code, rep = report(tmp_path, ["dmt-commute", "--algebra", "sl2_affine", "--hw", "1", "--level", "3",
                                  "--grade-cap", "2"])
    assert code == 0 and rep["verdict"] == "PASS"


def test_verdict_fail_exit_code(tmp_path):
    # a tolerance nobody can meet turns the algebraic verdict into FAIL
    code, rep = report(tmp_path, ["build-oper", "--spec", write(tmp_path, AFF), "--tol", "1e-30"])
    assert code == 2 and rep["verdict"] == "FAIL"


def test_missing_file(tmp_path):
    code, rep = report(tmp_path, ["solve-bethe", "--spec", str(tmp_path / "nope.json")])
    assert code == 1 and "error" in rep


def test_determinism_and_roundtrip(tmp_path):
    spec = write(tmp_path, AFF)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["build-oper", "--spec", spec, "--out", str(a)]) == 0
    assert run(["build-oper", "--spec", spec, "--out", str(b)]) == 0
    ja, jb = json.loads(a.read_text()), json.loads(b.read_text())
    ja.pop("timings"), jb.pop("timings")
    assert ja == jb
    # the echoed spec re-validates and reproduces the verdict
    assert validate(ja["spec"]) == []
    c = tmp_path / "c.json"
    assert run(["build-oper", "--spec", write(tmp_path, ja["spec"], "echo.json"), "--out", str(c)]) == 0
    assert json.loads(c.read_text())["verdict"] == ja["verdict"]


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("AFFGAUDIN_THREADS", "3")
    spec = load_spec(AFF)
    assert spec.solver.seeds == 8
    code, rep = report(tmp_path, ["check-monodromy", "--spec", write(tmp_path, AFF)])
    assert code == 0


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "affgaudin.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "affgaudin" in out.stdout
