"""Counterdiabatic driving of coupled oscillators within a fast/slow split.

The package covers the static problem (exact vs adiabatically factorized
ground states of two coupled unequal-mass oscillators), the control side
(exact and per-subsystem counterdiabatic terms for smooth spring ramps),
time evolution of the driven Gaussian state, hydrogenic counterdiabatic
terms for a trapped charged pair, and grid/quadrature oracles that check
every closed form against an independent numerical route.
"""

from .params import (
    Constant,
    DomainError,
    OscillatorParams,
    PhysicsValidityError,
    RampSchedule,
    UnitSystem,
    ValidityReport,
    ramp_eval,
    validate,
)
from .oscillators import (
    BOAFrame,
    GaussianState1D,
    GaussianState2D,
    ImaginaryFrequencyError,
    NormalModeFrame,
    boa_energy,
    boa_frame,
    boa_ground_state,
    exact_energy,
    exact_ground_state,
    geometric_quantities,
    normal_mode_frame,
    overlap_by_quadrature,
    static_fidelity,
)
from .cd_engine import (
    DegeneracyError,
    EffectiveSprings,
    SqueezeCD,
    boa_frequency_tables,
    cbod_cd,
    cbod_effective_springs,
    exact_cd,
    fd_derivative,
    mode_frequency_tables,
    spectral_cd_matrix,
    transformed_frequencies,
)
from .dynamics import (
    ErmakovSingularityError,
    ErmakovSolution,
    EvolutionDivergedError,
    EvolutionResult,
    dynamic_fidelity,
    ermakov_residual,
    evolve_cbod,
    scaled_state,
    solve_ermakov,
)
from .grid_oracle import (
    Grid,
    GridState,
    build_hamiltonian,
    eigenpairs_near,
    lowest_eigenpairs,
    overlap,
    propagate,
    sample_state,
    squeeze_operator,
)
from .coulomb import (
    CDProfile,
    HydrogenicState,
    RadialNodeError,
    berry_connection_formula,
    berry_connection_numeric,
    cd_potential,
    comparison_report,
    diagonal_cd_expectation,
    hydrogenic_energy,
    radial_g_derivative,
    radial_norm,
    radial_overlap,
    radial_wavefunction,
    trap_level_energy,
)
from .oracle_suite import OracleCheck, run_oracle_suite

__version__ = "0.1.0"
