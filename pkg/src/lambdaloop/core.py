"""Domain types, unit conventions and basis transforms.

Level scheme: two excited states |1>, |2> (|1> lies an energy splitting
above |2>) and two ground states, written either in the circular basis
{|3>, |4>} or in the linear basis {|X>, |Y>} with
|X> = (|3>+|4>)/sqrt(2), |Y> = (|3>-|4>)/sqrt(2).

Unit convention: every frequency-like quantity held by these types is an
angular frequency in rad/s.  Configuration files, presets and the CLI use
ordinary frequency in Hz; the 2*pi lives at that boundary and nowhere else.

The relative phase between the two drive fields is carried on the probe:
Omega_p = |Omega_p| * exp(i*phi), with the control real and positive.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import physical_constants

TWO_PI = 2.0 * math.pi
SQRT2 = math.sqrt(2.0)

#: Bohr magneton over Planck constant, Hz/T (CODATA).
BOHR_MAGNETON_HZ_PER_T = physical_constants["Bohr magneton in Hz/T"][0]

#: Row/column ordering of every 4x4 matrix in the package.
CIRCULAR_LABELS = ("1", "2", "3", "4")
LINEAR_LABELS = ("1", "2", "X", "Y")

LEVEL_INDEX = {"1": 0, "2": 1, "3": 2, "4": 3, "X": 2, "Y": 3}

# Density-matrix validity tolerances.
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-9

# Unitary mixing the ground pair into/out of the linear basis.  The 2x2
# ground block is a Hadamard, so the matrix is real, symmetric and its
# own inverse.
GROUND_MIX = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0 / SQRT2, 1.0 / SQRT2],
        [0.0, 0.0, 1.0 / SQRT2, -1.0 / SQRT2],
    ]
)


class SimulationError(Exception):
    """Base class for solver and propagation failures."""


def hz_to_angular(value_hz: float) -> float:
    """Ordinary frequency in Hz -> angular frequency in rad/s."""
    return TWO_PI * value_hz


def angular_to_hz(value: float) -> float:
    """Angular frequency in rad/s -> ordinary frequency in Hz."""
    return value / TWO_PI


@dataclass(frozen=True)
class AtomParams:
    """Fixed medium properties (all rates angular, rad/s)."""

    gamma_e: float        # excited-state decay rate, both excited states
    gamma_pop: float      # ground population-difference decay (circular basis)
    gamma_coh: float      # ground coherence decay (circular basis)
    delta_exc: float      # excited-state splitting
    optical_depth: float  # resonant intensity OD of the bare transition
    cell_length: float    # meters

    def __post_init__(self):
        for name in ("gamma_e", "gamma_pop", "gamma_coh"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.optical_depth < 0.0:
            raise ValueError("optical_depth must be >= 0")
        if self.cell_length <= 0.0:
            raise ValueError("cell_length must be > 0")
        if max(self.gamma_pop, self.gamma_coh) > 0.1 * self.gamma_e:
            warnings.warn(
                "ground-state rates are not small against gamma_e; the "
                "ground/excited timescale separation is marginal",
                RateHierarchyWarning,
                stacklevel=2,
            )

    @classmethod
    def from_hz(cls, gamma_e_hz, gamma_pop_hz, gamma_coh_hz, delta_exc_hz,
                optical_depth, cell_length):
        return cls(
            gamma_e=hz_to_angular(gamma_e_hz),
            gamma_pop=hz_to_angular(gamma_pop_hz),
            gamma_coh=hz_to_angular(gamma_coh_hz),
            delta_exc=hz_to_angular(delta_exc_hz),
            optical_depth=optical_depth,
            cell_length=cell_length,
        )


class RateHierarchyWarning(UserWarning):
    """Ground-state rates approach the optical decay rate."""


@dataclass(frozen=True)
class DriveConfig:
    """Per-run drive knobs (frequencies angular, phase in radians).

    phi is reduced to [0, 2*pi) on construction.  delta_probe is the probe
    one-photon detuning used by the weak-probe response; the degenerate
    steady-state and propagation paths ignore it.
    """

    delta_b: float       # Zeeman splitting between |3> and |4> (signed)
    phi: float           # input probe-control relative phase
    omega_c: float       # control Rabi magnitude
    omega_p: float       # probe Rabi magnitude
    delta_probe: float = 0.0

    def __post_init__(self):
        if self.omega_c < 0.0 or self.omega_p < 0.0:
            raise ValueError("Rabi magnitudes must be non-negative")
        object.__setattr__(self, "phi", self.phi % TWO_PI)

    @classmethod
    def from_hz(cls, delta_b_hz, phi_rad, omega_c_hz, omega_p_hz,
                delta_probe_hz=0.0):
        return cls(
            delta_b=hz_to_angular(delta_b_hz),
            phi=phi_rad,
            omega_c=hz_to_angular(omega_c_hz),
            omega_p=hz_to_angular(omega_p_hz),
            delta_probe=hz_to_angular(delta_probe_hz),
        )

    @property
    def probe_amplitude(self) -> complex:
        """Complex probe Rabi amplitude with the relative phase applied."""
        return self.omega_p * complex(math.cos(self.phi), math.sin(self.phi))


@dataclass(frozen=True)
class FieldPair:
    """Complex circular Rabi amplitudes (Omega_1, Omega_2) at one z."""

    omega1: complex
    omega2: complex

    def __post_init__(self):
        for value in (self.omega1, self.omega2):
            if not (np.isfinite(value.real) and np.isfinite(value.imag)):
                raise ValueError("field amplitudes must be finite")

    @property
    def total_power(self) -> float:
        return abs(self.omega1) ** 2 + abs(self.omega2) ** 2


def to_circular(omega_c: complex, omega_p: complex) -> FieldPair:
    """Linear (control, probe) amplitudes -> circular pair.

    Omega_1 = (Omega_c + Omega_p)/sqrt(2), Omega_2 = (Omega_c - Omega_p)/sqrt(2).
    """
    return FieldPair(
        omega1=(omega_c + omega_p) / SQRT2,
        omega2=(omega_c - omega_p) / SQRT2,
    )


def to_linear(fields: FieldPair) -> tuple[complex, complex]:
    """Circular pair -> linear (control, probe) amplitudes."""
    omega_c = (fields.omega1 + fields.omega2) / SQRT2
    omega_p = (fields.omega1 - fields.omega2) / SQRT2
    return omega_c, omega_p


def input_fields(drive: DriveConfig) -> FieldPair:
    """Circular amplitudes at the cell input for a drive configuration."""
    return to_circular(complex(drive.omega_c), drive.probe_amplitude)


def zeeman_shift(b_field: float, g_factor: float, m_quantum: int) -> float:
    """Zeeman splitting g * mu_B * m * B / h as an angular frequency.

    Odd in the field and linear in the magnetic quantum number.
    """
    return TWO_PI * g_factor * BOHR_MAGNETON_HZ_PER_T * m_quantum * b_field


def validate_density_matrix(rho: np.ndarray) -> None:
    """Raise ValueError unless rho is a valid physical state.

    Checks Hermiticity (1e-12 element-wise), unit trace (1e-10) and the
    numerical positivity floor (eigenvalues >= -1e-9).
    """
    if rho.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITICITY_TOL:
        raise ValueError(f"matrix is not Hermitian: max asymmetry {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
    eigs = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if eigs.min() < EIGENVALUE_FLOOR:
        raise ValueError(f"negative eigenvalue {eigs.min():.3e} below floor")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """4x4 complex state over the circular or linear level set."""

    rho: np.ndarray
    basis: str = "circular"

    def __post_init__(self):
        if self.basis not in ("circular", "linear"):
            raise ValueError(f"unknown basis {self.basis!r}")
        mat = np.array(self.rho, dtype=complex)
        mat.setflags(write=False)
        object.__setattr__(self, "rho", mat)

    @classmethod
    def from_matrix(cls, mat, basis="circular", validate=True):
        if validate:
            validate_density_matrix(np.asarray(mat, dtype=complex))
        return cls(rho=mat, basis=basis)

    @property
    def labels(self) -> tuple[str, ...]:
        return CIRCULAR_LABELS if self.basis == "circular" else LINEAR_LABELS

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho))

    def element(self, row: str, col: str) -> complex:
        """Matrix element by level label, e.g. element('1', 'X')."""
        return complex(self.rho[LEVEL_INDEX[row], LEVEL_INDEX[col]])

    def validate(self) -> None:
        validate_density_matrix(self.rho)


def basis_change_state(rho: DensityMatrix, direction: str) -> DensityMatrix:
    """Rotate a state between the circular and linear ground bases.

    direction is 'circular-to-linear' or 'linear-to-circular'.  The mixing
    is unitary on the ground block only, so trace, Hermiticity and the
    eigenvalue spectrum are preserved exactly.
    """
    if direction == "circular-to-linear":
        src, dst = "circular", "linear"
    elif direction == "linear-to-circular":
        src, dst = "linear", "circular"
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if rho.basis != src:
        raise ValueError(f"state is in the {rho.basis} basis, not {src}")
    rotated = GROUND_MIX @ rho.rho @ GROUND_MIX
    return DensityMatrix.from_matrix(rotated, basis=dst, validate=False)


@dataclass(frozen=True)
class Curve:
    """Sampled 1-D result: abscissa label plus ordered (x, y) points."""

    abscissa_name: str
    points: tuple

    def __post_init__(self):
        pts = tuple((float(x), y) for x, y in self.points)
        xs = [p[0] for p in pts]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("abscissa values must be strictly increasing")
        if not pts:
            raise ValueError("curve must contain at least one point")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def xs(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def ys(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])
