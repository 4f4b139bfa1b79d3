import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from stochorder.cli import EXIT_FAIL, EXIT_INVALID, EXIT_OK, FIXTURE_DIR, main


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return p


def test_solve_fixture(capsys, tmp_path):
    out_file = tmp_path / "r.json"
    csv_file = tmp_path / "s.csv"
    code, _, _ = run_cli(capsys, "solve", FIXTURE_DIR / "kg_binary.json", "--out", out_file, "--csv", csv_file)
    assert code == EXIT_OK
    rep = json.loads(out_file.read_text())["report"]
    assert rep["value"] == pytest.approx(0.6, abs=1e-12)
    rows = list(csv.DictReader(csv_file.open()))
    assert len(rows) == 11
    assert {"x0", "f", "optimizer"} <= set(rows[0])


def test_exact_output_is_deterministic(capsys):
    first = run_cli(capsys, "solve", FIXTURE_DIR / "kg_binary.json", "--exact")
    second = run_cli(capsys, "solve", FIXTURE_DIR / "kg_binary.json", "--exact")
    assert first[0] == EXIT_OK and first[1] == second[1]


@pytest.mark.parametrize("name", ["mps_spread", "lsd_staircase", "lsd_staircase_2d", "mps_simplex_2d"])
def test_expose_fixtures(capsys, name):
    code, out, _ = run_cli(capsys, "expose", FIXTURE_DIR / f"{name}.json")
    assert code == EXIT_OK
    assert json.loads(out)["report"]["extreme"]["is_extreme"]


def test_non_simplicial_is_invalid_input(capsys):
    code, _, err = run_cli(capsys, "expose", FIXTURE_DIR / "non_simplicial.json")
    assert code == EXIT_INVALID
    assert json.loads(err)["error"] == "NotExposable"


def test_stackelberg_fixtures(capsys):
    code, out, _ = run_cli(capsys, "stackelberg", FIXTURE_DIR / "sequential_persuasion.json", "--exact")
    assert code == EXIT_OK
    assert json.loads(out)["report"]["leader_value"] == pytest.approx(2 / 3)
    code, out, _ = run_cli(capsys, "stackelberg", FIXTURE_DIR / "option_to_own.json")
    rep = json.loads(out)["report"]
    assert code == EXIT_OK and rep["extremality"]["mu_vertex_of_leader_set"]


def test_updating_fixture(capsys):
    code, out, _ = run_cli(capsys, "updating", FIXTURE_DIR / "grether_gap.json")
    rep = json.loads(out)["report"]
    assert code == EXIT_OK
    assert not rep["divisible"] and rep["max_gap"] > 0


def test_couple_reports_a_kernel(capsys, tmp_path):
    doc = {"schema_version": "1", "problem_kind": "couple",
           "payload": {"grid": {"line": {"n": 3}}, "cone": "concave", "mu": {"dirac": 1}, "nu": [0.5, 0, 0.5]}}
    code, out, _ = run_cli(capsys, "couple", write(tmp_path, "c.json", doc))
    rep = json.loads(out)["report"]
    assert code == EXIT_OK and rep["status"] == "Found"


def test_grid_resolution_override(capsys, tmp_path):
    csv_file = tmp_path / "s.csv"
    code, _, _ = run_cli(capsys, "solve", FIXTURE_DIR / "kg_binary.json", "--grid-resolution", 20, "--csv", csv_file)
    assert code == EXIT_OK
    assert len(list(csv.DictReader(csv_file.open()))) == 21


@pytest.mark.parametrize("doc", [
    "{not json",
    {"problem_kind": "solve", "payload": {}},
    {"schema_version": "99", "problem_kind": "solve", "payload": {}},
    {"schema_version": "1", "problem_kind": "solve", "payload": {"grid": {"line": {"n": 3}}}},
    {"schema_version": "1", "problem_kind": "solve",
     "payload": {"grid": {"line": {"n": 3}}, "f": [1, 2], "mu": "uniform"}},
    {"schema_version": "1", "problem_kind": "solve",
     "payload": {"grid": {"line": {"n": 3}}, "f": [1, 2, 3], "mu": [0.5, 0.6, -0.1]}},
    {"schema_version": "1", "problem_kind": "envelope", "payload": {"grid": {"line": {"n": 3}}, "f": [1, 2, 3]}},
])
def test_malformed_input_exits_2(capsys, tmp_path, doc):
    code, out, err = run_cli(capsys, "solve", write(tmp_path, "bad.json", doc))
    assert code == EXIT_INVALID
    assert out == ""
    assert json.loads(err)["exit_code"] == EXIT_INVALID


def test_missing_file_exits_2(capsys, tmp_path):
    assert run_cli(capsys, "solve", tmp_path / "nope.json")[0] == EXIT_INVALID


def test_verify_needs_fixtures(capsys, tmp_path):
    assert run_cli(capsys, "verify", "exposed", "--fixtures", tmp_path)[0] == EXIT_INVALID


def test_verify_pass_and_fail(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "verify", "exposed")
    assert code == EXIT_OK and "[FAIL]" not in out and out.strip().endswith("verify: PASS")
    doc = json.loads((FIXTURE_DIR / "mps_spread.json").read_text())
    doc["expect"] = {"error": "NotExposable"}
    write(tmp_path, "wrong.json", doc)
    code, out, _ = run_cli(capsys, "verify", "exposed", "--fixtures", tmp_path)
    assert code == EXIT_FAIL and "[FAIL] exposed/wrong" in out


def test_verify_updating_suite(capsys):
    code, out, _ = run_cli(capsys, "verify", "updating")
    assert code == EXIT_OK


def test_console_entry_point(tmp_path):
    shutil.copy(FIXTURE_DIR / "kg_binary.json", tmp_path / "p.json")
    proc = subprocess.run([sys.executable, "-m", "stochorder", "solve", str(tmp_path / "p.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["problem_kind"] == "solve"
