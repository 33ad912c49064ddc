"""A self-contained Michelson subset: types, typechecker, interpreter, printer."""

from .core import I, Instr, MType, Script
from .interp import OVERFLOW_PAYLOAD, mtc_interpret, run_contract
from .printer import print_code, print_michelson, print_mtype, print_mvalue
from .typecheck import FAILED, mtc_typecheck, typecheck_script

__all__ = [
    "FAILED",
    "I",
    "Instr",
    "MType",
    "OVERFLOW_PAYLOAD",
    "Script",
    "mtc_interpret",
    "mtc_typecheck",
    "print_code",
    "print_michelson",
    "print_mtype",
    "print_mvalue",
    "run_contract",
    "typecheck_script",
]
