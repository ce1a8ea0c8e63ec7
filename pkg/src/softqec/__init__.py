"""Soft-information decoding and logical error mitigation for surface codes.

The package turns a decoder's per-shot class posteriors into calibrated
logical channel estimates and feeds them to mitigation: post-selection
and abort policies, probabilistic error cancellation, zero-noise
extrapolation, two-qubit gate characterization, and architecture-level
resource accounting.
"""

from .channels import PauliChannel, character_matrix, class_labels, label_index
from .errors import (
    CapacityError,
    MatchingInfeasibleError,
    NonInvertibleChannelError,
)
from .estimator import (
    ChannelEstimate,
    convergence_trace,
    merge,
    soft_vs_hard_variance,
    stabilization_point,
    update,
    update_batch,
)
from .exact import (
    CoupledCosetTable,
    MpsConfig,
    bias_table,
    coupled_coset_table,
    enumerate_coset_sums,
    enumerate_posteriors,
    mps_coset_sums,
    mps_posteriors,
)
from .experiments import (
    MemoryBatch,
    logical_error_rate,
    run_memory_batch,
)
from .matching import (
    DecodingGraph,
    MatchingDecoder,
    MatchingSolution,
    PosteriorVector,
    build_decoding_graph,
    class_candidate,
    mwpm,
    mwpm_posteriors,
)
from .pauli import CliffordGate, PauliString, commutes, conjugate, pauli_mul
from .pec import (
    LogicalCircuit,
    PecResult,
    QuasiProbDecomposition,
    analytic_expectation,
    invert_pauli_channel,
    pec_postselect_overhead,
    random_logical_circuit,
    run_pec,
    sample_insertion,
    shot_allocation_tradeoff,
    simulate_logical_shot,
    uniform_depolarizing,
)
from .resources import (
    AlgorithmProfile,
    ArchitectureParams,
    VolumeReport,
    compare_architectures,
    load_profiles,
    required_distance,
    spacetime_volume,
)
from .select import (
    SelectionPolicy,
    ShotRecord,
    abort_decision,
    expected_saved_steps,
    improvement_curve,
    postselect,
    simulate_abort_savings,
)
from .surface import (
    LOGICAL_CLASSES,
    CodeLayout,
    NoiseModel,
    Syndrome,
    build_planar_code,
    class_product,
    extract_syndrome,
    logical_effect,
    sample_error,
)
from .twoqubit import (
    LatticeSurgerySoftInputs,
    TwoPatchError,
    compose_ls_channel,
    gate_induced_channel,
    measurement_error_probs,
    propagate_tcnot,
    sequential_decode_tcnot,
    tcnot_experiment,
)
from .zne import (
    RichardsonWeights,
    ScaleSchedule,
    ZneResult,
    amplify_channel,
    pea_insertion_channel,
    richardson_coefficients,
    run_zne,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmProfile",
    "ArchitectureParams",
    "CapacityError",
    "ChannelEstimate",
    "CliffordGate",
    "CodeLayout",
    "CoupledCosetTable",
    "DecodingGraph",
    "LOGICAL_CLASSES",
    "LatticeSurgerySoftInputs",
    "LogicalCircuit",
    "MatchingDecoder",
    "MatchingInfeasibleError",
    "MatchingSolution",
    "MemoryBatch",
    "MpsConfig",
    "NoiseModel",
    "NonInvertibleChannelError",
    "PauliChannel",
    "PauliString",
    "PecResult",
    "PosteriorVector",
    "QuasiProbDecomposition",
    "RichardsonWeights",
    "ScaleSchedule",
    "SelectionPolicy",
    "ShotRecord",
    "Syndrome",
    "TwoPatchError",
    "VolumeReport",
    "ZneResult",
    "abort_decision",
    "amplify_channel",
    "analytic_expectation",
    "bias_table",
    "build_decoding_graph",
    "build_planar_code",
    "character_matrix",
    "class_candidate",
    "class_labels",
    "class_product",
    "commutes",
    "compare_architectures",
    "compose_ls_channel",
    "conjugate",
    "convergence_trace",
    "coupled_coset_table",
    "enumerate_coset_sums",
    "enumerate_posteriors",
    "expected_saved_steps",
    "extract_syndrome",
    "gate_induced_channel",
    "improvement_curve",
    "invert_pauli_channel",
    "label_index",
    "load_profiles",
    "logical_effect",
    "logical_error_rate",
    "measurement_error_probs",
    "merge",
    "mps_coset_sums",
    "mps_posteriors",
    "mwpm",
    "mwpm_posteriors",
    "pauli_mul",
    "pea_insertion_channel",
    "pec_postselect_overhead",
    "postselect",
    "propagate_tcnot",
    "random_logical_circuit",
    "required_distance",
    "richardson_coefficients",
    "run_memory_batch",
    "run_pec",
    "run_zne",
    "sample_error",
    "sample_insertion",
    "sequential_decode_tcnot",
    "shot_allocation_tradeoff",
    "simulate_abort_savings",
    "simulate_logical_shot",
    "soft_vs_hard_variance",
    "spacetime_volume",
    "stabilization_point",
    "tcnot_experiment",
    "uniform_depolarizing",
    "update",
    "update_batch",
]
