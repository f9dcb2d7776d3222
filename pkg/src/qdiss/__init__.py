"""Driven-qubit irreversibility/dissipation simulator."""

from .errors import DegenerateInputError, InvalidArgumentError, SupportMismatchError
from .protocol import (
    DriveStep,
    Protocol,
    PulseShape,
    build_rotating_axis,
    build_xy_quench,
    cumulative_unitaries,
    forward_backward_trajectories,
    protocol_a,
    protocol_b,
    reverse_protocol,
    step_unitary,
)
from .qmath import (
    BlochVector,
    DensityMatrix,
    bloch_convert,
    eig_hermitian,
    matrix_function_psd,
    relative_entropy,
    renyi_relative_entropy,
    unitary_from_axis_angle,
)
from .thermo import (
    GibbsSpec,
    RelationReport,
    TransitionTable,
    average_dissipated_work,
    exp_dissipated_work,
    free_energy_difference,
    gibbs_state,
    transition_probabilities,
    verify_relations,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateInputError",
    "InvalidArgumentError",
    "SupportMismatchError",
    "DriveStep",
    "Protocol",
    "PulseShape",
    "build_rotating_axis",
    "build_xy_quench",
    "cumulative_unitaries",
    "forward_backward_trajectories",
    "protocol_a",
    "protocol_b",
    "reverse_protocol",
    "step_unitary",
    "BlochVector",
    "DensityMatrix",
    "bloch_convert",
    "eig_hermitian",
    "matrix_function_psd",
    "relative_entropy",
    "renyi_relative_entropy",
    "unitary_from_axis_angle",
    "GibbsSpec",
    "RelationReport",
    "TransitionTable",
    "average_dissipated_work",
    "exp_dissipated_work",
    "free_energy_difference",
    "gibbs_state",
    "transition_probabilities",
    "verify_relations",
]
