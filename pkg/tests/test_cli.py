import json
import subprocess
import sys
from pathlib import Path

import pytest

from dimredcech.cli import COMMANDS, ProblemError, canonical_json, load_problem, main, parse_problem

PROBLEMS = sorted((Path(__file__).resolve().parents[1] / "problems").glob("*.json"))


def _run(capsys, *argv):
    code = main(list(map(str, argv)))
    out = capsys.readouterr()
    return code, out.out, out.err


def _write(tmp_path, obj, name="p.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj), encoding="utf-8")
    return p


def test_shipped_problems_exist():
    assert len(PROBLEMS) >= 5


@pytest.mark.parametrize("path", PROBLEMS, ids=lambda p: p.stem)
def test_problem_round_trip_is_idempotent(path):
    p = load_problem(str(path))
    once = canonical_json(p.canonical())
    again = parse_problem(json.loads(once))
    assert canonical_json(again.canonical()) == once
    assert again.digest() == p.digest()


@pytest.mark.parametrize("path", PROBLEMS, ids=lambda p: p.stem)
def test_verify_all_passes_on_shipped_problems(path, capsys):
    code, out, _ = _run(capsys, "verify-all", path, "--json", "--max-k", "3")
    assert code == 0
    report = json.loads(out)
    assert report["result"]["all_pass"], [c for c in report["result"]["checks"] if not c["pass"]]


def test_cech_command(capsys):
    code, out, _ = _run(capsys, "cech", PROBLEMS[0].parent / "projective6_n2.json", "--json", "--max-k", "2")
    assert code == 0
    groups = json.loads(out)["result"]
    assert json.dumps(groups).count('"torsion": [2]') >= 1


@pytest.mark.parametrize("command", [c for c in COMMANDS if c != "verify-all"])
def test_every_command_runs(command, capsys, tmp_path):
    base = {"torus7_heisenberg.json": ("cech", "dimred", "gysin", "bockstein"),
            "heisenberg_derham.json": ("derham",),
            "lemma4_circle.json": ("lemma4",),
            "weyl_torus7.json": ("xi-extract",)}
    (path,) = [p for p, cmds in base.items() if command in cmds]
    code, out, err = _run(capsys, command, PROBLEMS[0].parent / path, "--json", "--max-k", "2")
    assert code == 0, err
    assert json.loads(out)["command"] == command


def test_human_output(capsys):
    code, out, _ = _run(capsys, "dimred", PROBLEMS[0].parent / "torus7_heisenberg.json", "--degree", "2")
    assert code == 0
    assert out.startswith("dimred  digest ")


def test_timing_only_on_request(capsys):
    path = PROBLEMS[0].parent / "torus7_trivial.json"
    _, out, _ = _run(capsys, "cech", path, "--json", "--degree", "1")
    assert "seconds" not in json.loads(out)
    _, out, _ = _run(capsys, "cech", path, "--json", "--degree", "1", "--timing")
    assert "seconds" in json.loads(out)


def test_exit_code_parse_error(capsys, tmp_path):
    code, _, err = _run(capsys, "cech", tmp_path / "missing.json")
    assert code == 1 and "error" in err
    code, _, _ = _run(capsys, "cech", _write(tmp_path, {"nerve": {"fixture": "point"}, "bogus": 1}))
    assert code == 1
    code, _, _ = _run(capsys, "cech", _write(tmp_path, {"nerve": {"fixture": "circle3"}, "F": {"generator": [1]}}))
    assert code == 1


def test_exit_code_model_violation(capsys, tmp_path):
    # F supported on one face of a solid 3-simplex is not closed
    prob = {"nerve": {"fixture": "simplex3"}, "n": 1, "F": {"values": {"0,1,2": [1]}}}
    code, _, err = _run(capsys, "dimred", _write(tmp_path, prob))
    assert code == 2 and "model violation" in err
    code, _, _ = _run(capsys, "cech", _write(tmp_path, {"nerve": {"fixture": "point"}}, "q.json"), "--ring", "modN")
    assert code == 2


def test_parse_problem_validation():
    with pytest.raises(ProblemError):
        parse_problem([])
    with pytest.raises(ProblemError):
        parse_problem({"n": 0})
    with pytest.raises(ProblemError):
        parse_problem({"nerve": {"fixture": "circle3"}, "F": {"values": {"0,1,2": [1]}}})
    with pytest.raises(ProblemError):
        parse_problem({"weyl": "nope"})
    with pytest.raises(ProblemError):
        parse_problem({"nerve": {"maximal": [[0, 1, 2]]}, "n": 1, "s": {"values": {"0,1": ["1/2"]}}})
    p = parse_problem({"nerve": {"maximal": [[0, 1, 2]]}, "n": 1, "s": {"values": {"0,1": [2]}}})
    assert p.F.value((0, 1, 2)) == (2,)


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "dimredcech", "--help"], capture_output=True, text=True, check=True)
    assert "verify-all" in out.stdout
