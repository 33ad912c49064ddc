import io
import json
from importlib import resources

import pytest

from albert.cli import cli_main

from conftest import GOLDEN

VOTING = str(resources.files("albert").joinpath("data/voting.alb"))
STORE = '{threshold = (100 : mutez); votes = {Elt "no" 0; Elt "yes" 0}}'


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli_main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_typecheck_ok():
    code, out, err = run("typecheck", VOTING)
    assert code == 0 and "ok (2 functions)" in out and err == ""


def test_typecheck_dump():
    code, out, _ = run("typecheck", VOTING, "--dump")
    assert code == 0
    body = [l for l in out.splitlines() if l.startswith("  ") and not l.lstrip().startswith("|")]
    assert body and all(" ⊢ " in l and " ⊣ " in l for l in body)


def test_use_twice_is_a_user_error(tmp_path):
    bad = tmp_path / "bad.alb"
    bad.write_text("def f : {x : nat} -> {y : nat; z : nat} = y = x; z = x\n")
    code, out, err = run("typecheck", str(bad))
    assert code == 1 and "linear" in err and str(bad) in err


def test_parse_error_is_a_user_error(tmp_path):
    bad = tmp_path / "bad.alb"
    bad.write_text("def f : {} -> {} =\n  drop\n")
    code, _, err = run("typecheck", str(bad))
    assert code == 1 and err.startswith("error:")


def test_missing_file():
    code, _, err = run("typecheck", "/nonexistent.alb")
    assert code == 1 and "no such file" in err


def test_compile_matches_golden(tmp_path):
    target = tmp_path / "vote.tz"
    code, _, _ = run("compile", VOTING, "-o", str(target))
    assert code == 0
    assert target.read_text() == (GOLDEN / "voting.tz").read_text()
    code, out, _ = run("compile", VOTING)
    assert out == target.read_text()


def test_compile_unknown_entry():
    code, _, err = run("compile", VOTING, "--entry", "nope")
    assert code == 1 and "nope" in err


@pytest.mark.parametrize("cmd", ["run", "simulate"])
def test_run_and_simulate(cmd):
    inp = f'{{param = "yes"; store = {STORE}}}'
    code, out, _ = run(cmd, VOTING, "--entry", "guarded_vote", "--amount", "100", "--input", inp)
    assert code == 0
    assert out == (
        '{operations = ([] : list operation); store = {threshold = (100 : mutez); '
        'votes = ({Elt "no" 0; Elt "yes" 1} : map string nat)}}\n'
    )
    code, out, _ = run(cmd, VOTING, "--amount", "99", "--input", inp)
    assert code == 2 and out == 'failed with "you are so cheap!"\n'
    inp = f'{{param = "maybe"; store = {STORE}}}'
    code, out, _ = run(cmd, VOTING, "--amount", "100", "--input", inp)
    assert code == 2 and out == 'failed with "assert_some"\n'


def test_bad_input_is_a_user_error():
    code, _, err = run("run", VOTING, "--input", "{param = 1}")
    assert code == 1 and "input" in err
    code, _, _ = run("run", VOTING)
    assert code == 1


def test_outputs_are_deterministic():
    inp = f'{{param = "yes"; store = {STORE}}}'
    first = run("simulate", VOTING, "--amount", "100", "--input", inp)
    assert run("simulate", VOTING, "--amount", "100", "--input", inp) == first
    assert run("typecheck", VOTING, "--dump") == run("typecheck", VOTING, "--dump")


def test_fuzz_command(tmp_path):
    report = tmp_path / "r.jsonl"
    code, out, _ = run("fuzz", "--seed", "2", "--cases", "20", "--inputs", "2", "--report", str(report))
    assert code == 0
    assert "runs: 40\nagreed: 40\n" in out
    lines = report.read_text().splitlines()
    assert len(lines) == 40 and all(json.loads(l)["agree"] for l in lines)
