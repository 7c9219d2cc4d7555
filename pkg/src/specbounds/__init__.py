"""A priori bounds on the rotation of spectral subspaces of Hermitian
matrices under additive perturbation.

The package computes the classical and optimized estimating functions for
the maximal angle between unperturbed and perturbed spectral subspaces,
solves for the critical strengths where those bounds stop carrying
information, and verifies everything against exactly computed angles on
randomized finite models.
"""

from .bounds import (
    BoundFunction,
    BoundKind,
    ShiftBound,
    all_bound_functions,
    apriori_tantheta,
    bound_function,
    dk_sin2theta,
    dk_tan2theta,
    epsilon_shift,
    epsilon_shift_closed_form,
    generic_sin2theta,
    kmm_saturation_point,
    m_kmm,
    m_ms,
    ms_saturation_point,
    optimized_generic,
    optimized_off_diagonal,
    optimized_off_diagonal_comparable,
)
from .core import (
    EigenDecomposition,
    HermitianMatrix,
    OrthogonalProjection,
    SpectralPartition,
    eigen_decompose,
    maximal_angle,
    operator_norm,
    select_perturbed_indices,
    spectral_projection,
)
from .errors import ConfigurationError, ConvergenceError
from .lab import (
    Layout,
    PerturbationKind,
    ScenarioSpec,
    TrialRecord,
    VerificationReport,
    build_perturbation,
    build_unperturbed,
    ground_state_identity_check,
    random_scenario,
    run_regime_suite,
    run_trial,
    strength_limit,
    verify_bounds,
)
from .matrixfile import read_matrix_file, write_matrix_file
from .optimizer import (
    DenominatorKind,
    OptimizationResult,
    PartitionPoints,
    dp_oracle,
    estimating_function,
    generic_threshold_closed_form,
    kappa_max,
    max_reach,
    optimize_fixed_n,
    solve_threshold,
)

__version__ = "1.0.0"

__all__ = [
    "BoundFunction",
    "BoundKind",
    "ConfigurationError",
    "ConvergenceError",
    "DenominatorKind",
    "EigenDecomposition",
    "HermitianMatrix",
    "Layout",
    "OptimizationResult",
    "OrthogonalProjection",
    "PartitionPoints",
    "PerturbationKind",
    "ScenarioSpec",
    "ShiftBound",
    "SpectralPartition",
    "TrialRecord",
    "VerificationReport",
    "all_bound_functions",
    "apriori_tantheta",
    "bound_function",
    "build_perturbation",
    "build_unperturbed",
    "dk_sin2theta",
    "dk_tan2theta",
    "dp_oracle",
    "eigen_decompose",
    "epsilon_shift",
    "epsilon_shift_closed_form",
    "estimating_function",
    "generic_sin2theta",
    "generic_threshold_closed_form",
    "ground_state_identity_check",
    "kappa_max",
    "kmm_saturation_point",
    "m_kmm",
    "m_ms",
    "maximal_angle",
    "max_reach",
    "ms_saturation_point",
    "operator_norm",
    "optimize_fixed_n",
    "optimized_generic",
    "optimized_off_diagonal",
    "optimized_off_diagonal_comparable",
    "random_scenario",
    "read_matrix_file",
    "run_regime_suite",
    "run_trial",
    "select_perturbed_indices",
    "solve_threshold",
    "spectral_projection",
    "strength_limit",
    "verify_bounds",
    "write_matrix_file",
]
