"""Synthesis, holonomy verification and error analysis of single-shot holonomic qubit gates."""

__version__ = "0.1.0"

from .exceptions import ContractViolation, ConvergenceWarning, InvalidInput, UnreachableTransition
from .gate import (
    BrightDarkBasis,
    GateParams,
    LaserSettings,
    TargetRotation,
    bright_dark,
    build_h_eff,
    build_h_rot,
    check_holonomy,
    check_rwa,
    evolve_gate,
    gate_phase,
    logical_gate,
    map_to_lasers,
    params_to_physical,
    synthesize,
)
from .quantum_core import (
    LogicalOperator,
    bloch_input_state,
    distance_up_to_phase,
    hermitian_expm,
    state_fidelity,
)
