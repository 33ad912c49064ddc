import io
import json

import pytest

from albert import compiler
from albert.fuzz import campaign, differential_check, generate_program, generate_with_stats, random_input, run_case
from albert.fuzz.harness import shrink_program
from albert.syntax import ast as A
from albert.syntax import parse_program, print_albert
from albert.typer import typecheck_program

from conftest import voting_input

RHS_KINDS = {"ArgRhs", "Apply", "Proj", "Update", "MatchRhs", "Construct", "BinOp", "MapUpdate"}


def test_budget_one_is_noop():
    p = generate_program(0, 1)
    assert len(p.functions) == 1 and p.functions[0].body == A.Noop()
    with pytest.raises(ValueError):
        generate_program(0, 0)


def test_generated_programs_typecheck():
    for seed in range(10_000):
        typecheck_program(generate_program(seed, 40))


def test_generation_is_deterministic():
    for seed in (0, 1, 99, 12345):
        assert print_albert(generate_program(seed, 40)) == print_albert(generate_program(seed, 40))
        assert random_input(generate_program(seed), 3) == random_input(generate_program(seed), 3)


def test_every_rhs_form_is_covered_per_500_programs():
    for start in (0, 500, 1000):
        seen = set()
        for seed in range(start, start + 500):
            seen |= set(generate_with_stats(seed, 40)[1].rhs)
        assert RHS_KINDS <= seen, RHS_KINDS - seen


def test_voting_scenarios_agree(voting_program):
    for param, amount in (("yes", 100), ("yes", 99), ("maybe", 100)):
        v = differential_check(voting_program, voting_input(param), amount, entry="guarded_vote")
        assert v.agree, v.to_json()
    v = differential_check(voting_program, voting_input("yes"), 99, entry="guarded_vote")
    assert v.albert.failed and v.albert.text == '"you are so cheap!"'


def test_dead_computation_agrees():
    src = """def main : {param : nat; store : nat} -> {operations : list operation; store : nat} =
      x = 1; drop x; drop param; operations = ([] : list operation)"""
    p = parse_program(src)
    v = differential_check(p, A.record_val(param=A.NatVal(3), store=A.NatVal(4)))
    assert v.agree and not v.albert.failed


def test_small_campaign_agrees():
    res = campaign(seed=3, cases=60, budget=40, inputs=3)
    assert res.runs == 180 and res.all_agree


def test_report_lines_are_json():
    buf = io.StringIO()
    campaign(seed=1, cases=5, budget=20, inputs=2, report=buf)
    lines = [json.loads(l) for l in buf.getvalue().splitlines()]
    assert len(lines) == 10
    assert {"seed", "case", "agree", "albert", "michelson"} <= set(lines[0])
    assert all("program" not in l for l in lines if l["agree"])


def _swap_compare(monkeypatch):
    """A deliberately broken compiler: every comparison has its operands swapped."""
    emit = compiler.Emitter.emit

    def broken(self, op, *args):
        if op == "COMPARE":
            emit(self, "SWAP")
        emit(self, op, *args)

    monkeypatch.setattr(compiler.Emitter, "emit", broken)


def test_mutation_is_detected_and_shrunk(monkeypatch):
    _swap_compare(monkeypatch)
    res = campaign(seed=0, cases=100, budget=40, inputs=3)
    assert res.disagreements
    case, j, v = res.disagreements[0]
    assert not v.agree and v.shrink_trace
    small = parse_program(v.program)
    typecheck_program(small)
    # shrinking keeps the comparison that exposes the bug
    assert ">=" in v.program
    assert len(v.program) < len(print_albert(run_case(0, case, 40, 3)[0]))


def test_disagreement_reproducible_from_seed_and_case(monkeypatch):
    _swap_compare(monkeypatch)
    res = campaign(seed=0, cases=100, budget=40, inputs=3)
    case, j, v = res.disagreements[0]
    _, _, again = run_case(0, case, 40, 3)
    assert again[j].to_json() == v.to_json()


def test_shrink_without_failure_keeps_program():
    p = generate_program(5, 40)
    small, trace = shrink_program(p, lambda q: False)
    assert small == p and trace == []
