"""Exception hierarchy shared by every stage of the toolchain."""

from __future__ import annotations

from enum import Enum


class AlbertError(Exception):
    """Base class for user-facing errors (bad source, ill-typed program)."""


class ParseError(AlbertError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class TypeErrorKind(Enum):
    UnboundVariable = "unbound variable"
    VariableAlreadyBound = "variable already bound"
    LinearityLeftover = "linearity violation: leftover variable"
    TypeMismatch = "type mismatch"
    UnknownConstructor = "unknown constructor"
    NonExhaustiveMatch = "non-exhaustive match"
    DuplicateBranch = "duplicate branch"
    UnknownFunction = "unknown function"
    JoinClash = "join clash"


class AlbertTypeError(AlbertError):
    """A program rejected by alias inlining, well-formedness or the typer."""

    def __init__(self, kind: TypeErrorKind, detail: str, pos=None, function: str | None = None):
        self.kind = kind
        self.detail = detail
        self.pos = pos
        self.function = function
        super().__init__(self._render())

    def _render(self) -> str:
        where = ""
        if self.pos is not None:
            where = f"{self.pos[0]}:{self.pos[1]}: "
        ctx = f" (in function {self.function})" if self.function else ""
        return f"{where}{self.kind.value}: {self.detail}{ctx}"

    def located(self, pos=None, function: str | None = None) -> "AlbertTypeError":
        if self.pos is None and pos is not None:
            self.pos = pos
        if self.function is None and function is not None:
            self.function = function
        self.args = (self._render(),)
        return self


class JoinError(AlbertError):
    """Raised by the partial join operator when both sides bind a label."""

    def __init__(self, label: str):
        super().__init__(f"label {label!r} bound on both sides of a join")
        self.label = label


class ContractFailure(Exception):
    """The contract rejected the call; ``payload`` is the failure value."""

    def __init__(self, payload):
        super().__init__(payload)
        self.payload = payload


class EvalError(Exception):
    """Internal invariant breach in the reference evaluator (a typer bug)."""


class MichTypeError(AlbertError):
    def __init__(self, index: int, message: str):
        super().__init__(f"instruction {index}: {message}")
        self.index = index
        self.message = message


class MichFailure(Exception):
    """FAILWITH reached (or a runtime failure such as mutez overflow)."""

    def __init__(self, payload):
        super().__init__(payload)
        self.payload = payload
