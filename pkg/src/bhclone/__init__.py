"""Black holes as universal quantum cloners.

Closed-form cloning fidelities and number distributions for a black hole
that stimulates emission of incoming quanta, together with a brute-force
truncated Fock-space simulator that checks them and extends them to cases
without closed forms.
"""

from .analytic import (
    anticlone_fidelity,
    antiparticle_input_clone_fidelity,
    classical_limit_fidelity,
    early_time_clone_fidelity,
    late_time_antiparticle_distribution,
    late_time_fidelity_1M,
    late_time_particle_distribution,
    optimal_fidelity,
)
from .bogoliubov import (
    BlackHoleParams,
    CouplingConstants,
    EarlyTimeParams,
    couplings_from_params,
    early_time_coeffs,
    late_time_coeffs,
    params_from_couplings,
    temperature_from_mass,
)
from .cloning import LogicalQubit, QubitDensityMatrix, simulate_clone_fidelity, simulate_marginals, universality_check
from .errors import (
    BlackHoleCloningError,
    DomainError,
    EmptyPostselection,
    NonPositiveFrequencyRatio,
    NumericalError,
    ResourceError,
    TruncationError,
)
from .fock import FockSpace, FockVector, Propagator, build_early_hamiltonian, build_late_hamiltonian, choose_truncation
from .results import CloneReport, NumberDistribution
from .sweep import ResultRow, SweepConfig, run_sweep

__version__ = "0.1.0"

__all__ = [
    "BlackHoleCloningError",
    "BlackHoleParams",
    "CloneReport",
    "CouplingConstants",
    "DomainError",
    "EarlyTimeParams",
    "EmptyPostselection",
    "FockSpace",
    "FockVector",
    "LogicalQubit",
    "NonPositiveFrequencyRatio",
    "NumberDistribution",
    "NumericalError",
    "Propagator",
    "QubitDensityMatrix",
    "ResourceError",
    "ResultRow",
    "SweepConfig",
    "TruncationError",
    "anticlone_fidelity",
    "antiparticle_input_clone_fidelity",
    "build_early_hamiltonian",
    "build_late_hamiltonian",
    "choose_truncation",
    "classical_limit_fidelity",
    "couplings_from_params",
    "early_time_clone_fidelity",
    "early_time_coeffs",
    "late_time_antiparticle_distribution",
    "late_time_coeffs",
    "late_time_fidelity_1M",
    "late_time_particle_distribution",
    "optimal_fidelity",
    "params_from_couplings",
    "run_sweep",
    "simulate_clone_fidelity",
    "simulate_marginals",
    "temperature_from_mass",
    "universality_check",
]
