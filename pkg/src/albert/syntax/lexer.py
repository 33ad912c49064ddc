"""Tokenizer for Albert sources."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import ParseError

KEYWORDS = frozenset(
    {"def", "noop", "drop", "match", "with", "end", "type", "update", "True", "False", "Elt"}
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<int>-?[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\["\\])*")
  | (?P<punct>->|>=|[{}\[\]():;=|,.+])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "kw", "string", "punct", "eof"
    text: str
    line: int
    col: int

    @property
    def pos(self):
        return (self.line, self.col)


def unescape(literal: str) -> str:
    body = literal[1:-1]
    return re.sub(r"\\([\"\\])", r"\1", body)


def escape(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line, line_start = 1, 0
    n = len(source)
    while i < n:
        m = _TOKEN_RE.match(source, i)
        col = i - line_start + 1
        if m is None:
            raise ParseError(line, col, f"unexpected character {source[i]!r}")
        kind = m.lastgroup
        text = m.group()
        if kind == "ident" and text in KEYWORDS:
            kind = "kw"
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = i + text.rindex("\n") + 1
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens
