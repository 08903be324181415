"""Simulator and analysis toolkit for periodically driven waveguide arrays.

An N-guide chain with one harmonically modulated boundary guide supports a
zero-quasi-energy (dark) Floquet mode for odd N that traps light over wide
parameter ranges; tunneling revives when multiples of the drive frequency
bridge the static level spacing.  The package provides the discrete
coupled-mode model, a norm-monitored RK4 integrator, Floquet analysis,
closed-form resonance/Bessel predictors, deterministic parameter sweeps and a
split-step continuum beam-propagation check, all behind one CLI.
"""

from .analysis import ResonancePrediction, bessel_j, bessel_zeros, resonance_positions
from .continuum import (
    BpmResult,
    ContinuumConfig,
    ContinuumGrid,
    CouplingCalibration,
    DriveCalibration,
    Field,
    Mode,
    bpm_propagate,
    calibrate_coupling,
    calibrate_drive,
    chain_config,
    chain_positions,
    fundamental_mode,
    refractive_index,
    top_guide_mode,
)
from .errors import (
    BeatNotFoundError,
    BoundaryLeakError,
    ConvergenceError,
    DegenerateDarkModeError,
    NoBoundModeError,
    NonFiniteStateError,
    NonFloquetModeError,
    NormDriftError,
    NumericalError,
    PowerDriftError,
    UnitarityError,
)
from .floquet import (
    FloquetSolution,
    avg_populations,
    dark_floquet,
    match_modes,
    monodromy,
    nonzero_branch_gap,
    quasienergies,
    solution_to_json,
)
from .floquet import solve as floquet_solve
from .integrate import (
    Trajectory,
    default_z_end,
    evolve_state,
    min_population,
    propagate,
    write_trajectory_csv,
)
from .lattice import (
    LatticeConfig,
    StateVector,
    dark_state_unmodulated,
    hamiltonian_at,
    unit_excitation,
    unmodulated_spectrum,
)
from .sweep import (
    SweepResult,
    SweepSpec,
    refine_extrema,
    run_sweep,
    sweep_csv_text,
    width_at_level,
    write_spec_json,
    write_sweep_csv,
)

__version__ = "0.1.0"
