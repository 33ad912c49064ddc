from importlib import resources
from pathlib import Path

import pytest

from albert.syntax import parse_program, parse_value
from albert.typer import typecheck_program

GOLDEN = Path(__file__).parent / "golden"

# filled in by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


def voting_source() -> str:
    return resources.files("albert").joinpath("data/voting.alb").read_text()


def voting_input(param: str = "yes", threshold: int = 100, yes: int = 0, no: int = 0):
    typed = typecheck_program(parse_program(voting_source()))
    fn = typed.function("guarded_vote")
    text = (
        f'{{param = "{param}"; store = {{threshold = ({threshold} : mutez); '
        f'votes = {{Elt "no" {no}; Elt "yes" {yes}}}}}}}'
    )
    return parse_value(text, fn.input)


@pytest.fixture(scope="session")
def voting_program():
    return parse_program(voting_source())


@pytest.fixture(scope="session")
def voting_typed(voting_program):
    return typecheck_program(voting_program)
