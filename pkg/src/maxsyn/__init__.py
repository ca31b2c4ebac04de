"""Depth-optimal Clifford+T circuit synthesis by maximum weighted model counting."""

from .circuit import Circuit, Gate, parse_circuit, format_circuit
from .cnf import VarKind, WeightedCnf, read_wcnf, write_wcnf
from .counter import count, max_count, objective_of
from .weights import ExactW

__all__ = [
    "Circuit",
    "ExactW",
    "Gate",
    "VarKind",
    "WeightedCnf",
    "count",
    "format_circuit",
    "max_count",
    "objective_of",
    "parse_circuit",
    "read_wcnf",
    "write_wcnf",
]
__version__ = "0.1.0"
