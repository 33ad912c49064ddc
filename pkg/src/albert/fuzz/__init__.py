"""Random program generation and differential testing."""

from .generator import generate_program, generate_with_stats, random_input
from .harness import FuzzVerdict, campaign, differential_check, run_case, shrink_program

__all__ = [
    "FuzzVerdict",
    "campaign",
    "differential_check",
    "generate_program",
    "generate_with_stats",
    "random_input",
    "run_case",
    "shrink_program",
]
