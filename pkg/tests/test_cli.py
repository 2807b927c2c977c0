import json
import subprocess
import sys

import pytest

from lieherm.catalog_io import builtin, dump_document
from lieherm.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_catalog(capsys):
    code, out, err = run(capsys, "catalog")
    assert code == 0 and err == ""
    assert json.loads(out)["builtins"][0] == "abelian_<n>"


def test_validate_passes(capsys):
    code, out, _ = run(capsys, "validate", "--builtin", "kodaira_thurston")
    assert code == 0
    report = json.loads(out)
    assert report["validation"]["overall"] is True
    assert set(report) == {"input_name", "tool_version", "validation"}


def test_validate_broken_jacobi(capsys, tmp_path):
    doc = {"schema": 1, "mode": "real", "name": "broken", "dim_real": 4,
           "brackets": [[1, 2, 3, 1], [2, 3, 4, 1], [3, 4, 1, 1]],
           "J": [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]],
           "g": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]}
    path = tmp_path / "broken.lha.json"
    path.write_text(json.dumps(doc))
    code, out, err = run(capsys, "validate", str(path))
    assert code == 2
    assert json.loads(out)["validation"]["overall"] is False
    message = json.loads(err)["error"]["message"]
    assert "jacobi" in message


def test_analyze_kodaira_thurston(capsys):
    code, out, _ = run(capsys, "analyze", "--builtin", "kodaira_thurston")
    assert code == 1
    report = json.loads(out)
    assert report["constant_h"]["is_constant"] is False
    assert report["flags"] == {"kahler": False, "chern_flat": False, "complex_group": False}
    assert report["nilpotency_class"] == 2


def test_analyze_abelian(capsys):
    code, out, _ = run(capsys, "analyze", "--builtin", "abelian_3")
    assert code == 0
    assert json.loads(out)["constant_h"]["c_fit"] == 0


@pytest.mark.parametrize("name, code, conclusion", [
    ("complex_heisenberg", 0, "flat_complex_group"),
    ("iwasawa_real6", 0, "flat_complex_group"),
    ("abelian_2", 0, "flat_complex_group"),
    ("kodaira_thurston", 1, "refuted_constant_h"),
])
def test_certify(capsys, name, code, conclusion):
    got, out, _ = run(capsys, "certify", "--builtin", name)
    assert got == code
    report = json.loads(out)
    assert report["certificate"]["conclusion"] == conclusion
    assert report["salamon"]["satisfied"] is True


def test_certify_assume_salamon(capsys):
    code, out, _ = run(capsys, "certify", "--builtin", "complex_heisenberg", "--assume-salamon")
    assert code == 0


def test_certify_assume_salamon_rejects_wrong_form(capsys, tmp_path):
    doc = {"schema": 1, "mode": "complex", "name": "bad", "n": 2,
           "C": [[1, 1, 2, 1, 0]], "D": []}
    path = tmp_path / "bad.lha.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "certify", str(path), "--assume-salamon")
    assert code == 2
    assert "Salamon" in json.loads(err)["error"]["message"]


def test_certify_non_nilpotent(capsys, tmp_path):
    doc = {"schema": 1, "mode": "real", "name": "aff", "dim_real": 2,
           "brackets": [[1, 2, 2, 1]], "J": [[0, -1], [1, 0]], "g": [[1, 0], [0, 1]]}
    path = tmp_path / "aff.lha.json"
    path.write_text(json.dumps(doc))
    code, out, err = run(capsys, "certify", str(path))
    assert code == 2 and out == ""
    assert json.loads(err)["error"]["type"] == "PreconditionError"


def test_search_converges_on_heisenberg(capsys):
    code, out, _ = run(capsys, "search", "--builtin", "complex_heisenberg")
    assert code == 0
    assert json.loads(out)["search"]["best_residual"] == 0


def test_search_kodaira_thurston(capsys):
    code, out, _ = run(capsys, "search", "--builtin", "kodaira_thurston", "--restarts", "3", "--max-iters", "20")
    assert code == 1
    search = json.loads(out)["search"]
    assert search["converged"] is False
    assert search["config"]["restarts"] == 3


@pytest.mark.parametrize("argv", [
    ["analyze", "--builtin", "nope"],
    ["analyze"],
    ["analyze", "x.lha.json", "--builtin", "abelian_1"],
    ["analyze", "/nonexistent/x.lha.json"],
])
def test_input_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert set(json.loads(err)["error"]) == {"type", "message"}


def test_output_file_and_byte_identity(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["search", "--builtin", "kodaira_thurston", "--restarts", "2", "--max-iters", "15", "--seed", "3"]
    assert main(argv + ["--output", str(a)]) == 1
    assert main(argv + ["--output", str(b)]) == 1
    out, err = capsys.readouterr()
    assert out == "" and err == ""
    assert a.read_bytes() == b.read_bytes()
    code, out, _ = run(capsys, *argv)
    assert out.encode() == a.read_bytes()


def test_path_input_matches_builtin(capsys, tmp_path):
    path = tmp_path / "kt.lha.json"
    path.write_bytes(dump_document(builtin("kodaira_thurston")))
    _, from_file, _ = run(capsys, "certify", str(path))
    _, from_builtin, _ = run(capsys, "certify", "--builtin", "kodaira_thurston")
    assert from_file == from_builtin


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lieherm", "catalog"], capture_output=True)
    assert proc.returncode == 0
    assert b"kodaira_thurston" in proc.stdout
