import json
import subprocess
import sys
from pathlib import Path

import pytest

from finclone.rig import registry_dir

GOLDEN = Path(__file__).parent / "golden"
RIGS = Path(str(registry_dir()))


def run(*args, cwd=None):
    proc = subprocess.run([sys.executable, "-m", "finclone", *args], capture_output=True,
                          text=True, cwd=cwd)
    return proc.returncode, proc.stdout


def run_json(*args):
    code, out = run("--json", "--no-timing", *args)
    return code, json.loads(out)


def check_schema(report):
    for key in ("command", "inputs", "results", "exactness", "elapsed_ms"):
        assert key in report
    assert isinstance(report["elapsed_ms"], int)
    if report["exit_code"]:
        assert report["reason"]


def test_rig_validate_registry():
    code, rep = run_json("rig-validate", str(RIGS / "bool2.json"))
    assert code == 0
    check_schema(rep)


def test_rig_validate_tampered(tmp_path):
    doc = json.loads((RIGS / "z2.json").read_text())
    doc["add"][0][1] = 0
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    code, rep = run_json("rig-validate", str(p))
    assert code == 2
    check_schema(rep)
    assert rep["results"]["violations"]


def test_rig_validate_truncated(tmp_path):
    p = tmp_path / "t.json"
    p.write_text((RIGS / "z2.json").read_text()[:30])
    code, rep = run_json("rig-validate", str(p))
    assert code == 1 and "malformed" in rep["reason"]


@pytest.mark.parametrize("args, count", [
    (["--theory", "mat", "--rig", "bool2", "--arity", "2"], 4),
    (["--theory", "mat-aff", "--rig", "bool2", "--arity", "3"], 7),
    (["--theory", "initial", "--carrier", "2", "--arity", "5"], 5),
    (["--theory", "pointed-mat-op", "--rig", "z3", "--arity", "1"], 9),
])
def test_theory_slice_counts(args, count):
    code, rep = run_json("theory-slice", *args)
    assert code == 0 and rep["results"]["count"] == count


def test_theory_slice_closure(tmp_path):
    gens = [{"arity": 2, "table": [0, 0, 0, 1]}, {"arity": 1, "table": [1, 0]}]
    p = tmp_path / "g.json"
    p.write_text(json.dumps(gens))
    code, rep = run_json("theory-slice", "--theory", "closure", "--generators", str(p),
                         "--arity", "2")
    assert code == 0 and rep["results"]["count"] == 16


def test_theory_slice_guard():
    code, rep = run_json("theory-slice", "--theory", "full", "--carrier", "3", "--arity", "3")
    assert code == 3 and "guard" in rep["reason"]


def test_theory_slice_needs_rig():
    code, rep = run_json("theory-slice", "--theory", "mat", "--arity", "1")
    assert code == 1


@pytest.mark.parametrize("args, code", [
    (["--check", "mutual-commutant", "--rig", "z3", "--max-arity", "2"], 0),
    (["--check", "affine-commutant", "--rig", "z2", "--max-arity", "2"], 0),
    (["--check", "balanced", "--rig", "nc4"], 4),
    (["--check", "commutes", "--theory", "initial", "--other", "full"], 0),
    (["--check", "commutative", "--theory", "full"], 4),
    (["--check", "saturated", "--theory", "mat-aff", "--rig", "bool2"], 0),
])
def test_check(args, code):
    got, rep = run_json("check", *args)
    assert got == code
    check_schema(rep)


def test_balanced_failure_has_witness():
    _, rep = run_json("check", "--check", "balanced", "--rig", "nc4")
    assert rep["results"]["verdict"]["witnesses"]


def test_dist_filter_classify():
    code, rep = run_json("dist", "--context", "scalar-linear", "--rig", "bool2",
                         "--set-size", "3", "--classify")
    assert code == 0 and rep["results"]["count"] == 8
    names = {row["name"] for row in rep["results"]["classification"]}
    assert names <= {"proper filter", "improper filter", "ultrafilter"}


def test_dist_initial():
    code, rep = run_json("dist", "--context", "initial", "--set-size", "4", "--classify")
    assert code == 0 and rep["results"]["count"] == 4
    rows = rep["results"]["classification"]
    assert all(r["name"] == "ultrafilter" and len(r["principal_generator"]) == 1 for r in rows)


def test_dist_affine_laws():
    code, rep = run_json("dist", "--context", "scalar-affine", "--rig", "bool2",
                         "--set-size", "2", "--monad-laws")
    assert code == 0
    assert all(law["ok"] for law in rep["results"]["monad_laws"])


def test_dist_rejected_context():
    code, rep = run_json("dist", "--context", "scalar-linear", "--rig", "nc4",
                         "--set-size", "1", "--max-arity", "1")
    assert code == 4 and "rejected" in rep["reason"]


@pytest.mark.slow
def test_report_all_registry(tmp_path):
    out = tmp_path / "r.json"
    code, _ = run("--no-timing", "report-all", "--rig-dir", str(RIGS), "--out", str(out))
    assert code == 0
    check_schema(json.loads(out.read_text()))


@pytest.mark.slow
def test_report_all_broken(tmp_path):
    for p in RIGS.glob("*.json"):
        (tmp_path / p.name).write_text(p.read_text())
    doc = json.loads((RIGS / "z3.json").read_text())
    doc["mul"][2][2] = 2
    (tmp_path / "broken.json").write_text(json.dumps(doc))
    code, _ = run("report-all", "--rig-dir", str(tmp_path), "--out", str(tmp_path / "r.json"))
    assert code == 2


def test_report_all_empty(tmp_path):
    code, _ = run("report-all", "--rig-dir", str(tmp_path), "--out", str(tmp_path / "r.json"))
    assert code == 1


def test_text_output_default():
    code, out = run("theory-slice", "--theory", "mat", "--rig", "bool2", "--arity", "2")
    assert code == 0 and "count: 4" in out


@pytest.mark.parametrize("golden, args", [
    ("theory_slice_mat_bool2_2.json",
     ["theory-slice", "--theory", "mat", "--rig", "bool2", "--arity", "2", "--dump"]),
    ("check_mutual_z3_2.json",
     ["check", "--check", "mutual-commutant", "--rig", "z3", "--max-arity", "2"]),
])
def test_golden_and_deterministic(golden, args):
    _, first = run("--json", "--no-timing", *args)
    _, second = run("--json", "--no-timing", "--backend", "numpy", *args)
    assert first == (GOLDEN / golden).read_text()
    assert json.loads(second)["results"] == json.loads(first)["results"]
