"""Albert abstract syntax, parser and printer."""

from . import ast
from .parser import parse_program, parse_type, parse_value
from .printer import print_albert, print_instruction, print_rhs, print_type, print_value

__all__ = [
    "ast",
    "parse_program",
    "parse_type",
    "parse_value",
    "print_albert",
    "print_instruction",
    "print_rhs",
    "print_type",
    "print_value",
]
