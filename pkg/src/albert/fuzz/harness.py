"""Differential testing: reference evaluator vs. compiled Michelson."""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field, replace
from typing import Optional

from .. import types as T
from ..compiler import compile_contract, compile_value, decode_value
from ..errors import AlbertError, ContractFailure, MichFailure
from ..evaluator import eval_function
from ..michelson import print_mvalue, run_contract
from ..michelson.core import Pair
from ..syntax import ast as A
from ..syntax.printer import print_albert, print_value
from ..typer import typecheck_program
from .generator import generate_with_stats, random_amount, random_input


@dataclass
class Outcome:
    """Either a returned value or a failure payload, both as Michelson data."""

    failed: bool
    value: object
    text: str

    def to_json(self) -> dict:
        return {"failed": self.failed, "value": self.text}


@dataclass
class FuzzVerdict:
    program: str
    input: str
    amount: int
    albert: Optional[Outcome]
    michelson: Optional[Outcome]
    agree: bool
    shrink_trace: list = field(default_factory=list)
    error: Optional[str] = None

    def to_json(self) -> dict:
        """Report line; the program text is kept only for disagreements."""
        out = {
            "agree": self.agree,
            "amount": self.amount,
            "input": self.input,
            "albert": self.albert.to_json() if self.albert else None,
            "michelson": self.michelson.to_json() if self.michelson else None,
            "error": self.error,
            "shrink_trace": self.shrink_trace,
        }
        if not self.agree:
            out["program"] = self.program
        return out


def _albert_side(tp, entry, input, amount) -> Outcome:
    try:
        out = eval_function(tp, entry, input, amount)
    except ContractFailure as exc:
        payload = exc.payload
        m = compile_value(payload, T.value_type(payload))
        return Outcome(True, m, print_mvalue(m))
    return Outcome(False, out, print_value(out))


def _michelson_side(tp, entry, input, amount) -> Outcome:
    fn = tp.function(entry)
    script = compile_contract(tp, entry)
    param = compile_value(input.get("param"), fn.input.get("param"))
    storage = compile_value(input.get("store"), fn.input.get("store"))
    try:
        ops, new_storage = run_contract(script, param, storage, amount)
    except MichFailure as exc:
        return Outcome(True, exc.payload, print_mvalue(exc.payload))
    out = decode_value(Pair(ops, new_storage), fn.output)
    return Outcome(False, out, print_value(out))


def _run_both(p: A.Program, input: A.Value, amount: int, entry: str | None):
    tp = typecheck_program(p)
    entry = entry or tp.names[-1]
    a = _albert_side(tp, entry, input, amount)
    m = _michelson_side(tp, entry, input, amount)
    return a, m, a.failed == m.failed and a.value == m.value


def differential_check(
    p: A.Program, input: A.Value, amount: int = 0, entry: str | None = None, shrink: bool = True
) -> FuzzVerdict:
    """Run both semantics and compare; shrink the program on disagreement."""
    source = print_albert(p)
    try:
        a, m, agree = _run_both(p, input, amount, entry)
    except (AlbertError, AssertionError, TypeError) as exc:
        return FuzzVerdict(source, print_value(input), amount, None, None, False, error=f"{type(exc).__name__}: {exc}")
    verdict = FuzzVerdict(source, print_value(input), amount, a, m, agree)
    if not agree and shrink:
        small, trace = shrink_program(p, lambda q: _disagrees(q, input, amount, entry))
        verdict.shrink_trace = trace
        verdict.program = print_albert(small)
    return verdict


def _disagrees(p, input, amount, entry) -> bool:
    try:
        typecheck_program(p)
    except AlbertError:
        return False
    try:
        return not _run_both(p, input, amount, entry)[2]
    except (AssertionError, TypeError):
        return True
    except AlbertError:
        return False


def shrink_program(p: A.Program, still_bad) -> tuple[A.Program, list]:
    """Greedily delete top-level instructions while the program stays well typed
    and ``still_bad`` holds."""
    trace = []
    changed = True
    while changed:
        changed = False
        for fi in range(len(p.functions) - 2, -1, -1):
            cand = A.Program(p.type_aliases, p.functions[:fi] + p.functions[fi + 1:])
            if still_bad(cand):
                trace.append(f"removed function {p.functions[fi].name}")
                p = cand
                changed = True
        for fi, f in enumerate(p.functions):
            instrs = A.flatten_seq(f.body)
            k = 0
            while k < len(instrs):
                rest = instrs[:k] + instrs[k + 1:]
                cand_f = replace(f, body=A.seq_of(rest))
                cand = A.Program(p.type_aliases, p.functions[:fi] + (cand_f,) + p.functions[fi + 1:])
                if still_bad(cand):
                    trace.append(f"{f.name}: removed instruction {k}")
                    p, f, instrs = cand, cand_f, rest
                    changed = True
                else:
                    k += 1
    return p, trace


# ------------------------------------------------------------- campaigns


@dataclass
class CampaignResult:
    cases: int = 0
    runs: int = 0
    agreed: int = 0
    failures_both: int = 0
    disagreements: list = field(default_factory=list)
    coverage: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def all_agree(self) -> bool:
        return self.agreed == self.runs and not self.disagreements


def run_case(seed: int, case: int, budget: int = 40, inputs: int = 3):
    """Generate program ``case`` of campaign ``seed`` and check it on random inputs.

    Everything is derived from (seed, case), so a disagreement can be
    replayed from those two numbers alone.
    """
    case_seed = seed * 1_000_003 + case
    p, stats = generate_with_stats(case_seed, budget)
    rng = random.Random(case_seed)
    verdicts = []
    for j in range(inputs):
        v = random_input(p, rng.randrange(2**32))
        verdicts.append(differential_check(p, v, random_amount(rng)))
    return p, stats, verdicts


def campaign(seed: int = 0, cases: int = 1000, budget: int = 40, inputs: int = 3, report=None) -> CampaignResult:
    res = CampaignResult()
    start = time.perf_counter()
    cov: dict = {}
    for case in range(cases):
        _, stats, verdicts = run_case(seed, case, budget, inputs)
        for k, n in stats.rhs.items():
            cov[k] = cov.get(k, 0) + n
        res.cases += 1
        for j, v in enumerate(verdicts):
            res.runs += 1
            if v.agree:
                res.agreed += 1
                res.failures_both += bool(v.albert and v.albert.failed)
            else:
                res.disagreements.append((case, j, v))
            if report is not None:
                report.write(json.dumps({"seed": seed, "case": case, "input_index": j, **v.to_json()}) + "\n")
    res.coverage = dict(sorted(cov.items()))
    res.seconds = time.perf_counter() - start
    return res
