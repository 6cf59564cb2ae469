"""Perturbative expansion and Monte-Carlo validation for a discretized
random Schrödinger operator at weak disorder.

The package computes the deterministic coefficients of the disorder
expansion of averaged resolvent matrix elements, validates them against
direct Monte-Carlo sampling of the random Hamiltonian, expands the
smoothed density of states, and certifies the quantitative bounds that
control both expansions.
"""

from .bounds import (
    c_tilde,
    check_arctan_bound,
    check_log_integral_bound,
    check_resolvent_sum_bound,
    check_sup_weight_grid,
    check_weighted_resolvent_sum,
    const_C,
    const_C0,
    const_C1,
    main_error_bound_rhs,
    measured_cB,
    scaling_exponent,
)
from .coefficients import (
    CoefficientResult,
    bhat_star_norms,
    coefficient_T,
    coefficient_T_oracle,
    conj_symmetry_check,
    error_functional_E,
    eta_limit_probe,
    partition_term_C,
    partition_term_bound,
    truncation_tail_bound,
    volume_limit_probe,
)
from .dos import (
    ChiBump,
    dos_coefficient_D,
    dos_density_order0,
    dos_eta_grid_check,
    dos_expansion,
    dos_mc,
    trace_class_bound_check,
)
from .errors import BudgetError, CheckFailure, ConfigError, ToleranceError
from .lattice import (
    MomentumLattice,
    ProfileSpec,
    Wavepacket,
    build_lattice,
    discrete_integral,
    dist_to_spectrum,
    fourier_decay_check,
    nu,
    profile_fourier_periodized,
    profile_periodized_value,
    star_norm,
    wavepacket_fourier_periodized,
)
from .montecarlo import (
    EstimatorResult,
    HamiltonianMatrix,
    PoissonConfig,
    assemble_hamiltonian,
    estimate_expectation,
    estimate_partial_term,
    neumann_identity_check,
    potential_matrix,
    resolvent_matrix_element,
    rng_for,
    sample_config,
    smoothed_trace_sample,
    smoothed_trace_stone,
)
from .partitions import (
    SetPartition,
    WeightDistribution,
    apply_MA,
    bell_number,
    chi_tilde,
    enumerate_partitions,
    moment_weight,
    partition_maps,
    permutation_count_check,
    poisson_factorial_moment,
    sigma,
)
from .report import BoundReport

__all__ = [
    "BoundReport",
    "BudgetError",
    "CheckFailure",
    "ChiBump",
    "CoefficientResult",
    "ConfigError",
    "EstimatorResult",
    "HamiltonianMatrix",
    "MomentumLattice",
    "PoissonConfig",
    "ProfileSpec",
    "SetPartition",
    "ToleranceError",
    "Wavepacket",
    "WeightDistribution",
    "apply_MA",
    "assemble_hamiltonian",
    "bell_number",
    "bhat_star_norms",
    "build_lattice",
    "c_tilde",
    "check_arctan_bound",
    "check_log_integral_bound",
    "check_resolvent_sum_bound",
    "check_sup_weight_grid",
    "check_weighted_resolvent_sum",
    "chi_tilde",
    "coefficient_T",
    "coefficient_T_oracle",
    "conj_symmetry_check",
    "const_C",
    "const_C0",
    "const_C1",
    "discrete_integral",
    "dist_to_spectrum",
    "dos_coefficient_D",
    "dos_density_order0",
    "dos_eta_grid_check",
    "dos_expansion",
    "dos_mc",
    "enumerate_partitions",
    "error_functional_E",
    "estimate_expectation",
    "estimate_partial_term",
    "eta_limit_probe",
    "fourier_decay_check",
    "main_error_bound_rhs",
    "measured_cB",
    "moment_weight",
    "neumann_identity_check",
    "nu",
    "partition_maps",
    "partition_term_C",
    "partition_term_bound",
    "permutation_count_check",
    "poisson_factorial_moment",
    "potential_matrix",
    "profile_fourier_periodized",
    "profile_periodized_value",
    "resolvent_matrix_element",
    "rng_for",
    "sample_config",
    "scaling_exponent",
    "sigma",
    "smoothed_trace_sample",
    "smoothed_trace_stone",
    "star_norm",
    "trace_class_bound_check",
    "truncation_tail_bound",
    "volume_limit_probe",
    "wavepacket_fourier_periodized",
]
