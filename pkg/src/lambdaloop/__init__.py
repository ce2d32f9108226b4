"""Simulator for a four-level double-lambda atomic medium.

Two phase-coherent optical fields and a static magnetic field drive the
medium; the package computes steady-state response, field propagation
through the optically thick cell, probe transmission against relative
phase and magnetic field, weak-probe dispersion spectra, and slow/fast
light classification.
"""

from .core import (
    AtomParams,
    Curve,
    DensityMatrix,
    DriveConfig,
    FieldPair,
    SimulationError,
    angular_to_hz,
    basis_change_state,
    hz_to_angular,
    input_fields,
    to_circular,
    to_linear,
    zeeman_shift,
)
from .liouvillian import (
    Liouvillian,
    SteadyStateError,
    build_hamiltonian_circular,
    build_hamiltonian_linear,
    build_liouvillian,
    evolve_expm,
    nullspace_dimension,
    steady_state,
    steady_state_matrix,
    substitution_image,
    time_evolve,
)
from .propagation import (
    PropagationError,
    PropagationResult,
    RefinementWarning,
    bare_transition_transmission,
    calibrate_kappa,
    probe_power,
    propagate,
    transmission,
)
from .spectroscopy import (
    PulseSpec,
    SlopeFit,
    SweepSpec,
    WeakProbeWarning,
    chi_probe_timedomain,
    group_velocity_class,
    modulation_depth,
    phase_grid,
    pulse_response,
    refractive_spectrum,
    sideband_transfer,
    sweep_bfield,
    sweep_phase,
    weak_probe_response,
)
from .presets import preset_atom, preset_drive, preset_names, preset_values

__version__ = "0.1.0"

__all__ = [
    "AtomParams",
    "Curve",
    "DensityMatrix",
    "DriveConfig",
    "FieldPair",
    "Liouvillian",
    "PropagationError",
    "PropagationResult",
    "PulseSpec",
    "RefinementWarning",
    "SimulationError",
    "SlopeFit",
    "SteadyStateError",
    "SweepSpec",
    "WeakProbeWarning",
    "angular_to_hz",
    "bare_transition_transmission",
    "basis_change_state",
    "build_hamiltonian_circular",
    "build_hamiltonian_linear",
    "build_liouvillian",
    "calibrate_kappa",
    "chi_probe_timedomain",
    "evolve_expm",
    "group_velocity_class",
    "hz_to_angular",
    "input_fields",
    "modulation_depth",
    "nullspace_dimension",
    "phase_grid",
    "preset_atom",
    "preset_drive",
    "preset_names",
    "preset_values",
    "probe_power",
    "propagate",
    "pulse_response",
    "refractive_spectrum",
    "sideband_transfer",
    "steady_state",
    "steady_state_matrix",
    "substitution_image",
    "sweep_bfield",
    "sweep_phase",
    "time_evolve",
    "to_circular",
    "to_linear",
    "transmission",
    "weak_probe_response",
    "zeeman_shift",
]
