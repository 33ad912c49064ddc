"""Albert: a linearly typed intermediate language compiled to Michelson."""

__version__ = "0.1.0"
