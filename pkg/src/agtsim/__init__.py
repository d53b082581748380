"""Adiabatic gate teleportation simulator.

Pauli-sum Hamiltonians whose ground states teleport qubits and gates,
sector-resolved gap scans of the interpolating Hamiltonian, schedule
design from those scans, Schrodinger propagation, and end-to-end scheme
runs with machine-checkable verdicts.
"""

from .paulis import (
    PauliString,
    OperatorSum,
    gate_hamiltonian,
    conjugate_operator,
    controlled_term,
    operator_from_dense,
    identity_sum,
)
from .gates import (
    parse_unitary,
    unitary_to_json,
    principal_sqrt,
    rotation2,
    rz,
    ry,
    is_unitary,
    is_orthogonal,
    random_unitary,
    random_state,
)
from .states import (
    StateVector,
    Fragment,
    state_vector,
    mes_state,
    matrix_state,
    gate_fragment,
    qubit_fragment,
    ket,
    assemble_state,
    apply_local_unitary,
    apply_cswap,
    inner,
    fidelity,
    reduced_density,
)
from .sectors import (
    SectorBasis,
    sector_decompose,
    sector_with_k,
    sector_matrix,
    offsector_block_norm,
)
from .spectral import (
    EigensolverError,
    SpectralProfile,
    SpinChainPair,
    TimingReport,
    default_s_grid,
    pagt_pair,
    chain_pair,
    to_spin_chain,
    gap_profile,
    min_gap,
    cross_sector_audit,
    spectral_norm,
    pagt_norm_diff,
    witness_expectation,
    sufficient_time,
    closed_form_gap,
    loglog_slope,
)
from .evolution import (
    Schedule,
    linear_schedule,
    gap_adapted_schedule,
    tabulated_schedule,
    lagged_schedule,
    EvolutionReport,
    StepConvergenceError,
    evolve,
    evolve_multiterm,
    BranchDecomposition,
    branch_phase,
    reduced_purity,
)
from .schemes import (
    SCHEME_IDS,
    ACCEPTED_VERDICTS,
    ValidationError,
    Thresholds,
    SchemeSpec,
    SchemeReport,
    run_scheme,
)

__version__ = "0.1.0"

__all__ = [
    "PauliString",
    "OperatorSum",
    "gate_hamiltonian",
    "conjugate_operator",
    "controlled_term",
    "operator_from_dense",
    "identity_sum",
    "parse_unitary",
    "unitary_to_json",
    "principal_sqrt",
    "rotation2",
    "rz",
    "ry",
    "is_unitary",
    "is_orthogonal",
    "random_unitary",
    "random_state",
    "StateVector",
    "Fragment",
    "state_vector",
    "mes_state",
    "matrix_state",
    "gate_fragment",
    "qubit_fragment",
    "ket",
    "assemble_state",
    "apply_local_unitary",
    "apply_cswap",
    "inner",
    "fidelity",
    "reduced_density",
    "SectorBasis",
    "sector_decompose",
    "sector_with_k",
    "sector_matrix",
    "offsector_block_norm",
    "EigensolverError",
    "SpectralProfile",
    "SpinChainPair",
    "TimingReport",
    "default_s_grid",
    "pagt_pair",
    "chain_pair",
    "to_spin_chain",
    "gap_profile",
    "min_gap",
    "cross_sector_audit",
    "spectral_norm",
    "pagt_norm_diff",
    "witness_expectation",
    "sufficient_time",
    "closed_form_gap",
    "loglog_slope",
    "Schedule",
    "linear_schedule",
    "gap_adapted_schedule",
    "tabulated_schedule",
    "lagged_schedule",
    "EvolutionReport",
    "StepConvergenceError",
    "evolve",
    "evolve_multiterm",
    "BranchDecomposition",
    "branch_phase",
    "reduced_purity",
    "SCHEME_IDS",
    "ACCEPTED_VERDICTS",
    "ValidationError",
    "Thresholds",
    "SchemeSpec",
    "SchemeReport",
    "run_scheme",
]
