"""Preparation and validation of approximate grid states of an oscillator.

A register of N qubits is viewed as one 2^N-level system whose levels
index a comb of displacements; entangling the register with a squeezed
oscillator mode and disentangling it again leaves the oscillator in an
approximate grid (GKP) state.  The package simulates that protocol both
as exact unitaries on a position grid and as a Lindblad master equation
in a displaced frame with realistic noise channels, fits the resulting
states against the grid-state family, and ships a CLI that emits
deterministic CSV/JSON artifacts.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    GridMismatchError,
    GridTooSmallError,
    InsufficientCutoffError,
    ScheduleError,
    StepSizeError,
)
from .qudit import (
    Circuit,
    Gate,
    QuditDims,
    QuditOperator,
    VPrepParams,
    build_v_state,
    circuit_unitary,
    displacement_dx,
    fourier_coeff,
    index_set,
    interpolate,
    peak_sigma,
    qft_circuit,
    qft_matrix,
    u_v_circuit,
    x_operator,
    y_operator,
)
from .oscillator import (
    FockVector,
    GridDensityMatrix,
    PositionGrid,
    WaveFunction,
    WignerGrid,
    default_grid,
    density_from_factors,
    fidelity_mixed,
    fidelity_pure,
    from_fock,
    hermite_functions,
    ladder_ops,
    momentum_displace,
    position_shift,
    pure_density,
    purity,
    squeezed_vacuum,
    to_fock,
    width_db,
    width_from_db,
    wigner,
)
from .gkp import (
    FitReport,
    GkpParams,
    LogicalAmplitudes,
    fit_gkp,
    gkp_state,
    logical_state,
)
from .protocol import (
    IdealRun,
    JointState,
    ProtocolParams,
    ScalingRow,
    analytic_density,
    default_width_rule,
    disentanglement_entropy,
    reduce_oscillator,
    run_ideal,
    scaling_study,
)
from .dispersive import (
    DispersiveResult,
    DriveSchedule,
    DriveSegment,
    NoiseRates,
    SimConfig,
    SweepPoint,
    accumulated_areas,
    build_schedule,
    effective_hamiltonian,
    integrate,
    lindblad_rhs,
    period_durations,
    run_dispersive,
    schedule_times,
    sweep_noise,
)

__all__ = [
    "ConfigError",
    "GridMismatchError",
    "GridTooSmallError",
    "InsufficientCutoffError",
    "ScheduleError",
    "StepSizeError",
    "Circuit",
    "Gate",
    "QuditDims",
    "QuditOperator",
    "VPrepParams",
    "build_v_state",
    "circuit_unitary",
    "displacement_dx",
    "fourier_coeff",
    "index_set",
    "interpolate",
    "peak_sigma",
    "qft_circuit",
    "qft_matrix",
    "u_v_circuit",
    "x_operator",
    "y_operator",
    "FockVector",
    "GridDensityMatrix",
    "PositionGrid",
    "WaveFunction",
    "WignerGrid",
    "default_grid",
    "density_from_factors",
    "fidelity_mixed",
    "fidelity_pure",
    "from_fock",
    "hermite_functions",
    "ladder_ops",
    "momentum_displace",
    "position_shift",
    "pure_density",
    "purity",
    "squeezed_vacuum",
    "to_fock",
    "width_db",
    "width_from_db",
    "wigner",
    "FitReport",
    "GkpParams",
    "LogicalAmplitudes",
    "fit_gkp",
    "gkp_state",
    "logical_state",
    "IdealRun",
    "JointState",
    "ProtocolParams",
    "ScalingRow",
    "analytic_density",
    "default_width_rule",
    "disentanglement_entropy",
    "reduce_oscillator",
    "run_ideal",
    "scaling_study",
    "DispersiveResult",
    "DriveSchedule",
    "DriveSegment",
    "NoiseRates",
    "SimConfig",
    "SweepPoint",
    "accumulated_areas",
    "build_schedule",
    "effective_hamiltonian",
    "integrate",
    "lindblad_rhs",
    "period_durations",
    "run_dispersive",
    "schedule_times",
    "sweep_noise",
    "__version__",
]
