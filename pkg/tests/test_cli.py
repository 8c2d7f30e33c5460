import json
import subprocess
import sys

import pytest

from conftest import pipeline_docs
from rxnfuse.cli import main
from rxnfuse.docmodel import Reaction, save_reactions


def _logs(err):
    return [json.loads(line) for line in err.splitlines() if line.strip()]


def test_empty_document(tmp_path, capsys):
    doc = tmp_path / "d.json"
    doc.write_text('{"figures":[],"texts":[],"tables":[]}')
    assert main(["extract", "--input", str(doc)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["reactions"] == []


def test_malformed_json(tmp_path, capsys):
    doc = tmp_path / "d.json"
    doc.write_text("{oops")
    assert main(["extract", "--input", str(doc)]) == 1
    (rec,) = _logs(capsys.readouterr().err)
    assert rec["pointer"] == "" and rec["level"] == "error"


def test_schema_violation_pointer(tmp_path, capsys):
    doc = tmp_path / "d.json"
    doc.write_text(json.dumps({"tables": [{"headers": ["a"], "rows": [["1", "2"]]}]}))
    assert main(["align", "--input", str(doc)]) == 1
    (rec,) = _logs(capsys.readouterr().err)
    assert rec["pointer"] == "/tables/0/rows/0"


def test_missing_input(tmp_path, capsys):
    assert main(["extract", "--input", str(tmp_path / "nope.json")]) == 1


def test_unknown_flag_rejected():
    with pytest.raises(SystemExit) as info:
        main(["extract", "--input", "x", "--frobnicate"])
    assert info.value.code == 2


@pytest.mark.parametrize("command", ["extract", "resolve", "align"])
def test_fixture_documents_and_warnings(command, tmp_path, capsys):
    path = next(p for p in pipeline_docs() if p.stem.startswith("02"))
    out = tmp_path / "out.json"
    assert main([command, "--input", str(path), "--output", str(out)]) == 0
    data = json.loads(out.read_text())
    assert set(data) == {"reactions", "warnings"}
    logged = _logs(capsys.readouterr().err)
    assert len(logged) == len(data["warnings"])


def test_directory_with_workers(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    for p in pipeline_docs():
        (src / p.name).write_text(p.read_text())
    serial, parallel = tmp_path / "a", tmp_path / "b"
    assert main(["extract", "--input", str(src), "--output", str(serial)]) == 0
    assert main(["extract", "--input", str(src), "--output", str(parallel), "--jobs", "2"]) == 0
    for p in pipeline_docs():
        assert (serial / p.name).read_bytes() == (parallel / p.name).read_bytes()


def test_eval_modes(tmp_path, capsys):
    gold = [Reaction(frozenset({"CC#C"}), frozenset({"CC(C)=O"}))]
    pred = [Reaction(frozenset({"CC#C"}), frozenset({"CC(O)=C"}))]
    save_reactions(tmp_path / "g.json", gold)
    save_reactions(tmp_path / "p.json", pred)
    args = ["eval", "--pred", str(tmp_path / "p.json"), "--gold", str(tmp_path / "g.json")]
    assert main(args + ["--mode", "exact"]) == 0
    exact = json.loads(capsys.readouterr().out)
    assert exact["tp"] == 0 and exact["fn"] == 1
    assert main(args + ["--mode", "soft"]) == 0
    soft = json.loads(capsys.readouterr().out)
    assert soft["accuracy"] == 100.0


def test_eval_bad_structure(tmp_path, capsys):
    (tmp_path / "p.json").write_text('{"reactions": [{"reactants": ["C1CC"], "products": ["C"]}]}')
    (tmp_path / "g.json").write_text('{"reactions": []}')
    assert main(["eval", "--pred", str(tmp_path / "p.json"), "--gold", str(tmp_path / "g.json")]) == 1


def test_canon(capsys):
    assert main(["canon", "OCC"]) == 0
    assert capsys.readouterr().out.strip() == "CCO"
    assert main(["canon", "C1CC"]) == 1


def test_tautomers(capsys):
    assert main(["tautomers", "CC(C)=O"]) == 0
    lines = capsys.readouterr().out.split()
    assert "CC(C)=O" in lines and len(lines) == 2


def test_console_entry_point(tmp_path):
    doc = tmp_path / "d.json"
    doc.write_text('{"figures":[],"texts":[],"tables":[]}')
    proc = subprocess.run([sys.executable, "-m", "rxnfuse.cli", "extract", "--input", str(doc)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["reactions"] == []
