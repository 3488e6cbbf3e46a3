"""Stabilizer-tableau simulation, a state-vector oracle, and CHSH experiments."""

from .bell import (
    CHSHSettings,
    Direction,
    LHVClosedForm,
    LHVMonteCarlo,
    QuantumSinglet,
    chsh_max_search,
    chsh_value,
)
from .circuit import Circuit, parse_circuit
from .pauli import PauliString, commutes, group_closure, multiply
from .statevector import DenseState, prepare_basis
from .tableau import StabilizerTableau, new_zero_state, run_circuit

__version__ = "0.1.0"

__all__ = [
    "CHSHSettings",
    "Circuit",
    "DenseState",
    "Direction",
    "LHVClosedForm",
    "LHVMonteCarlo",
    "PauliString",
    "QuantumSinglet",
    "StabilizerTableau",
    "chsh_max_search",
    "chsh_value",
    "commutes",
    "group_closure",
    "multiply",
    "new_zero_state",
    "parse_circuit",
    "prepare_basis",
    "run_circuit",
]
