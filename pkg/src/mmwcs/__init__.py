"""Compressive channel estimation benchmarks for mmWave hybrid beamforming.

The package provides a narrowband geometric channel simulator, three
sparse estimators (vectorized pursuit, factored 2-D pursuit, and a
two-stage joint-row pipeline), two direct least-squares baselines, and a
Monte-Carlo harness that reports NMSE and runtime comparisons as CSV
plus rendered figures.
"""

from .channel import (
    ConfigError,
    DictionaryPair,
    PathSet,
    PilotError,
    ResourceLimitError,
    SystemConfig,
    atom_2d,
    build_1d_sensing_matrix,
    build_channel,
    build_dictionaries,
    build_grid,
    build_pilots,
    build_selection_precoders,
    cancel_pilots,
    generate_paths,
    steering_from_frequency,
    steering_vector,
    synthesize_measurements,
)
from .estimators import (
    DictionaryExhausted,
    SparseEstimate,
    StoppingRule,
    TwoStageResult,
    aod_stage,
    flat_to_pair,
    ls_1d_direct,
    ls_2d,
    match_2d,
    omp_1d,
    omp_2d,
    pair_to_flat,
    reconstruct_channel,
    reconstruct_from_grid,
    simplified_ls_2d,
    somp_aoa_stage,
    two_stage,
)
from .harness import (
    METHODS,
    SummaryRow,
    SweepSpec,
    TrialRecord,
    emit_csv,
    make_trial_instance,
    memory_footprint,
    nmse,
    read_csv,
    run_nmse_sweep,
    run_runtime_sweep,
    summarize,
)
from .linalg import (
    DimensionMismatch,
    SingularSystemError,
    devec,
    hermitian_solve,
    khatri_rao,
    kron,
    mat_inner,
    vec,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DictionaryExhausted",
    "DictionaryPair",
    "DimensionMismatch",
    "METHODS",
    "PathSet",
    "PilotError",
    "ResourceLimitError",
    "SingularSystemError",
    "SparseEstimate",
    "StoppingRule",
    "SummaryRow",
    "SweepSpec",
    "SystemConfig",
    "TrialRecord",
    "TwoStageResult",
    "aod_stage",
    "atom_2d",
    "build_1d_sensing_matrix",
    "build_channel",
    "build_dictionaries",
    "build_grid",
    "build_pilots",
    "build_selection_precoders",
    "cancel_pilots",
    "devec",
    "emit_csv",
    "flat_to_pair",
    "generate_paths",
    "hermitian_solve",
    "khatri_rao",
    "kron",
    "ls_1d_direct",
    "ls_2d",
    "make_trial_instance",
    "mat_inner",
    "match_2d",
    "memory_footprint",
    "nmse",
    "omp_1d",
    "omp_2d",
    "pair_to_flat",
    "read_csv",
    "reconstruct_channel",
    "reconstruct_from_grid",
    "run_nmse_sweep",
    "run_runtime_sweep",
    "simplified_ls_2d",
    "somp_aoa_stage",
    "steering_from_frequency",
    "steering_vector",
    "summarize",
    "synthesize_measurements",
    "two_stage",
    "vec",
]
