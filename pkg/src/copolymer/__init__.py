"""Simulation and verification laboratory for disordered copolymer models.

A disordered copolymer is a renewal process decorated with excursion signs
and random monomer charges.  This package computes exact quenched partition
functions for the discrete model, simulates the continuum model built on
stable regenerative sets, estimates free energies and critical curves, and
runs the coarse-graining constructions that connect the two.
"""

__version__ = "0.1.0"

from .models import (
    TailedRenewalLaw,
    DisorderLaw,
    CouplingParams,
    RenewalMassFunction,
    build_renewal_law,
    mgf,
    renewal_mass_function,
    hc_bounds,
)
from .discrete import (
    DisorderSample,
    QuenchedRun,
    FreeEnergyEstimate,
    PathSample,
    excursion_weight,
    log_partition_exact,
    brute_force_log_partition,
    sample_path,
    estimate_free_energy,
    estimate_hc,
    weak_coupling_point,
)
from .continuum import (
    GtDtLaw,
    ExcursionDecomposition,
    ContinuumQuenched,
    sample_g,
    sample_d_given_g,
    sample_regenerative_excursions,
    continuum_log_partition,
    modified_log_partition,
    campbell_check,
    excursion_scaling_check,
)
from .coarsegrain import (
    Skeleton,
    CoupledBlockPair,
    RnReport,
    coarse_grain_discrete,
    coarse_grain_continuum,
    skeleton_hamiltonian,
    coarse_grained_hamiltonian_discrete,
    skorohod_pair,
    rn_ratio,
    skeleton_log_rn_bound,
)

__all__ = [
    "TailedRenewalLaw", "DisorderLaw", "CouplingParams", "RenewalMassFunction",
    "build_renewal_law", "mgf", "renewal_mass_function", "hc_bounds",
    "DisorderSample", "QuenchedRun", "FreeEnergyEstimate", "PathSample",
    "excursion_weight", "log_partition_exact", "brute_force_log_partition",
    "sample_path", "estimate_free_energy", "estimate_hc", "weak_coupling_point",
    "GtDtLaw", "ExcursionDecomposition", "ContinuumQuenched",
    "sample_g", "sample_d_given_g", "sample_regenerative_excursions",
    "continuum_log_partition", "modified_log_partition", "campbell_check",
    "excursion_scaling_check",
    "Skeleton", "CoupledBlockPair", "RnReport",
    "coarse_grain_discrete", "coarse_grain_continuum", "skeleton_hamiltonian",
    "coarse_grained_hamiltonian_discrete", "skorohod_pair", "rn_ratio",
    "skeleton_log_rn_bound",
]
