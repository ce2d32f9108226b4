"""Master-equation generator, steady state and time evolution.

The Hamiltonian couples each circular field to both excited states,

    H = (delta_b/2)(|3><3| - |4><4|) + Delta |1><1|
        + Omega_1 (|2><3| + |1><3|) + Omega_2 (|2><4| - |1><4|) + h.c.

with every quantity an angular frequency.  Dissipation is Lindblad form:
each excited state decays at gamma_e with equal branching into the two
ground states; the ground block relaxes toward the unpolarized mixture
diag(1/2, 1/2) at gamma_pop; the remaining circular-basis ground
coherence decay (gamma_coh - gamma_pop) is pure dephasing, which requires
gamma_coh >= gamma_pop.  With this set the circular ground population
difference decays at exactly gamma_pop and rho_34 at exactly gamma_coh.

States are vectorized row-major: vec(A rho B) = (A kron B^T) vec(rho).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .core import (
    AtomParams,
    DensityMatrix,
    DriveConfig,
    FieldPair,
    GROUND_MIX,
    SimulationError,
    TWO_PI,
    validate_density_matrix,
)

DIM = 4
I4 = np.eye(DIM)

#: Relative residual allowed on generator * vec(rho) after the solve.
STEADY_RESIDUAL_TOL = 1e-8

#: Trace drift at which fixed-step integration is declared unstable.
TRACE_DRIFT_LIMIT = 1e-6


class SteadyStateError(SimulationError):
    """Steady-state solve failed or is not unique."""


def _op(i: int, j: int) -> np.ndarray:
    m = np.zeros((DIM, DIM), dtype=complex)
    m[i, j] = 1.0
    return m


# Coupling operators multiplying each complex Rabi amplitude (the h.c.
# partner multiplies the conjugate amplitude).
COUPLING_FIELD1 = _op(1, 2) + _op(0, 2)          # |2><3| + |1><3|
COUPLING_FIELD2 = _op(1, 3) - _op(0, 3)          # |2><4| - |1><4|
COUPLING_CONTROL = _op(1, 2) + _op(0, 3)         # |2><X| + |1><Y|
COUPLING_PROBE = _op(1, 3) + _op(0, 2)           # |2><Y| + |1><X|

# Zeeman operator per unit delta_b and the excited-splitting projector.
ZEEMAN_CIRCULAR = 0.5 * (_op(2, 2) - _op(3, 3))
ZEEMAN_LINEAR = 0.5 * (_op(2, 3) + _op(3, 2))
UPPER_PROJECTOR = _op(0, 0)

#: Row functional extracting the trace from a row-major vectorized state.
TRACE_ROW = np.eye(DIM, dtype=complex).reshape(-1)


def commutator_superop(op: np.ndarray) -> np.ndarray:
    """Superoperator for -i[op, .] acting on row-major vec(rho)."""
    return -1j * (np.kron(op, I4) - np.kron(I4, op.T))


def dissipator_superop(jump_ops) -> np.ndarray:
    """Lindblad dissipator superoperator for a list of jump operators."""
    total = np.zeros((DIM * DIM, DIM * DIM), dtype=complex)
    for L in jump_ops:
        ldl = L.conj().T @ L
        total += np.kron(L, L.conj())
        total -= 0.5 * (np.kron(ldl, I4) + np.kron(I4, ldl.T))
    return total


def jump_operators(params: AtomParams, basis: str = "circular") -> list:
    """Jump operators realizing the decay model in either basis."""
    if params.gamma_coh < params.gamma_pop:
        raise ValueError(
            "gamma_coh (ground coherence decay, "
            f"{params.gamma_coh:.6g} rad/s) must be >= gamma_pop (ground "
            f"population-difference decay, {params.gamma_pop:.6g} rad/s); "
            "the extra dephasing rate would be negative"
        )
    branch = math.sqrt(params.gamma_e / 2.0)
    reset = math.sqrt(params.gamma_pop / 2.0)
    ops = [
        branch * _op(2, 0), branch * _op(3, 0),   # |1> -> |3>, |4>
        branch * _op(2, 1), branch * _op(3, 1),   # |2> -> |3>, |4>
        reset * _op(2, 2), reset * _op(2, 3),
        reset * _op(3, 2), reset * _op(3, 3),
    ]
    dephase = params.gamma_coh - params.gamma_pop
    if dephase > 0.0:
        ops.append(math.sqrt(dephase / 2.0) * (_op(2, 2) - _op(3, 3)))
    if basis == "linear":
        ops = [GROUND_MIX @ L @ GROUND_MIX for L in ops]
    elif basis != "circular":
        raise ValueError(f"unknown basis {basis!r}")
    return ops


@dataclass(frozen=True, eq=False)
class GeneratorTemplate:
    """Generator pieces linear in (delta_b, field, conj(field)).

    Assembling from the pieces keeps per-point cost low inside sweeps and
    propagation loops, where only the drive terms change.
    """

    static: np.ndarray
    zeeman: np.ndarray
    drive_a: np.ndarray
    drive_a_conj: np.ndarray
    drive_b: np.ndarray
    drive_b_conj: np.ndarray
    basis: str

    def generator(self, delta_b: float, amp_a: complex, amp_b: complex) -> np.ndarray:
        return (
            self.static
            + delta_b * self.zeeman
            + amp_a * self.drive_a
            + np.conj(amp_a) * self.drive_a_conj
            + amp_b * self.drive_b
            + np.conj(amp_b) * self.drive_b_conj
        )


def circular_template(params: AtomParams) -> GeneratorTemplate:
    """Template over (delta_b, Omega_1, Omega_2) in the circular basis."""
    return GeneratorTemplate(
        static=params.delta_exc * commutator_superop(UPPER_PROJECTOR)
        + dissipator_superop(jump_operators(params, "circular")),
        zeeman=commutator_superop(ZEEMAN_CIRCULAR),
        drive_a=commutator_superop(COUPLING_FIELD1),
        drive_a_conj=commutator_superop(COUPLING_FIELD1.conj().T),
        drive_b=commutator_superop(COUPLING_FIELD2),
        drive_b_conj=commutator_superop(COUPLING_FIELD2.conj().T),
        basis="circular",
    )


def linear_template(params: AtomParams) -> GeneratorTemplate:
    """Template over (delta_b, Omega_c, Omega_p) in the linear basis."""
    return GeneratorTemplate(
        static=params.delta_exc * commutator_superop(UPPER_PROJECTOR)
        + dissipator_superop(jump_operators(params, "linear")),
        zeeman=commutator_superop(ZEEMAN_LINEAR),
        drive_a=commutator_superop(COUPLING_CONTROL),
        drive_a_conj=commutator_superop(COUPLING_CONTROL.conj().T),
        drive_b=commutator_superop(COUPLING_PROBE),
        drive_b_conj=commutator_superop(COUPLING_PROBE.conj().T),
        basis="linear",
    )


def build_hamiltonian_circular(params: AtomParams, drive: DriveConfig,
                               fields: FieldPair) -> np.ndarray:
    """Circular-basis Hamiltonian for explicit field amplitudes."""
    h = (
        params.delta_exc * UPPER_PROJECTOR
        + drive.delta_b * ZEEMAN_CIRCULAR
        + fields.omega1 * COUPLING_FIELD1
        + fields.omega2 * COUPLING_FIELD2
    )
    return h + h.conj().T - np.diag(np.diag(h)).real


def build_hamiltonian_linear(params: AtomParams, drive: DriveConfig) -> np.ndarray:
    """Linear-basis Hamiltonian at the degenerate drive point."""
    h = (
        params.delta_exc * UPPER_PROJECTOR
        + drive.delta_b * ZEEMAN_LINEAR
        + drive.omega_c * COUPLING_CONTROL
        + drive.probe_amplitude * COUPLING_PROBE
    )
    return h + h.conj().T - np.diag(np.diag(h)).real


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """16x16 master-equation generator with its build inputs."""

    generator: np.ndarray
    params: AtomParams
    drive: DriveConfig
    fields: FieldPair
    basis: str = "circular"


def build_liouvillian(params: AtomParams, drive: DriveConfig,
                      fields: FieldPair) -> Liouvillian:
    """Full generator -i[H, .] + dissipator in the circular basis."""
    gen = circular_template(params).generator(
        drive.delta_b, fields.omega1, fields.omega2
    )
    return Liouvillian(generator=gen, params=params, drive=drive, fields=fields)


def nullspace_dimension(generator: np.ndarray, rel_tol: float = 1e-11) -> int:
    """Number of singular values below rel_tol times the largest.

    The cutoff sits far above machine-level null values and far below the
    slowest physical rate for any realistic parameter set.
    """
    sv = np.linalg.svd(generator, compute_uv=False)
    return int(np.sum(sv < rel_tol * sv[0]))


def steady_state_matrix(generator: np.ndarray, *, validate: bool = True) -> np.ndarray:
    """Unique unit-trace kernel element of the generator as a 4x4 matrix.

    One row of the generator is replaced by the trace constraint and the
    resulting dense system solved by LU with one step of iterative
    refinement.  The residual of the *original* equations is always
    checked.
    """
    scale = np.max(np.abs(generator))
    if scale == 0.0:
        raise SteadyStateError("zero generator has no unique steady state")
    a = generator.copy()
    a[0, :] = TRACE_ROW * scale
    b = np.zeros(DIM * DIM, dtype=complex)
    b[0] = scale
    try:
        vec = np.linalg.solve(a, b)
        vec += np.linalg.solve(a, b - a @ vec)
    except np.linalg.LinAlgError as exc:
        if nullspace_dimension(generator) > 1:
            raise SteadyStateError(
                "degenerate steady state: generator kernel has dimension "
                f"{nullspace_dimension(generator)}"
            ) from exc
        raise SteadyStateError(f"steady-state solve failed: {exc}") from exc

    gen_norm = np.linalg.norm(generator)
    residual = np.linalg.norm(generator @ vec)
    if not np.isfinite(residual) or residual > STEADY_RESIDUAL_TOL * gen_norm:
        if nullspace_dimension(generator) > 1:
            raise SteadyStateError(
                "degenerate steady state: generator kernel has dimension "
                f"{nullspace_dimension(generator)}"
            )
        raise SteadyStateError(
            f"steady-state residual {residual:.3e} exceeds "
            f"{STEADY_RESIDUAL_TOL:.0e} * ||generator|| = "
            f"{STEADY_RESIDUAL_TOL * gen_norm:.3e}"
        )

    rho = vec.reshape(DIM, DIM)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    if validate:
        try:
            validate_density_matrix(rho)
        except ValueError as exc:
            raise SteadyStateError(f"steady state is unphysical: {exc}") from exc
    return rho


def steady_state(liou: Liouvillian, *, validate: bool = True) -> DensityMatrix:
    """Steady state of a Liouvillian as a DensityMatrix."""
    rho = steady_state_matrix(liou.generator, validate=validate)
    return DensityMatrix.from_matrix(rho, basis=liou.basis, validate=False)


def _coerce_state(rho0) -> np.ndarray:
    if isinstance(rho0, DensityMatrix):
        return np.array(rho0.rho, dtype=complex)
    return np.array(rho0, dtype=complex)


def time_evolve(rho0, liou: Liouvillian, t_final: float, dt: float) -> DensityMatrix:
    """Integrate d(rho)/dt = generator . rho with classical RK4.

    Fixed step; the final partial step is shortened to land on t_final.
    Explicit stepping demands dt below the stability limit set by the
    fastest generator eigenvalue, so long horizons at stiff parameters
    belong to evolve_expm instead.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if t_final < 0.0:
        raise ValueError("t_final must be non-negative")
    gen = liou.generator
    vec = _coerce_state(rho0).reshape(-1)
    trace_ref = np.real(TRACE_ROW @ vec)

    n_full, remainder = divmod(t_final, dt)
    steps = [dt] * int(n_full)
    if remainder > 1e-15 * max(t_final, dt):
        steps.append(remainder)
    for k, h in enumerate(steps):
        k1 = gen @ vec
        k2 = gen @ (vec + 0.5 * h * k1)
        k3 = gen @ (vec + 0.5 * h * k2)
        k4 = gen @ (vec + h * k3)
        vec = vec + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = abs(np.real(TRACE_ROW @ vec) - trace_ref)
        if not np.isfinite(drift) or drift > TRACE_DRIFT_LIMIT:
            raise SimulationError(
                f"trace drift {drift:.3e} after step {k + 1} signals "
                f"step-size instability; decrease dt below {h:.3e}"
            )
    rho = vec.reshape(DIM, DIM)
    return DensityMatrix.from_matrix(rho, basis=liou.basis, validate=False)


def evolve_expm(rho0, liou: Liouvillian, t_final: float) -> DensityMatrix:
    """Apply the exact semigroup exp(generator * t) to a state.

    Scaling-and-squaring matrix exponential on the 16x16 generator; valid
    at any stiffness and horizon, which makes it the long-time companion
    oracle to the algebraic steady-state solve.
    """
    if t_final < 0.0:
        raise ValueError("t_final must be non-negative")
    vec = _coerce_state(rho0).reshape(-1)
    propagator = expm(liou.generator * t_final)
    rho = (propagator @ vec).reshape(DIM, DIM)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix.from_matrix(rho, basis=liou.basis, validate=False)


def substitution_image(drive: DriveConfig) -> DriveConfig:
    """Drive guaranteed to produce identical probe observables.

    Reversing the magnetic field while advancing the relative phase by pi
    conjugates the generator by a fixed unitary, so every probe observable
    coincides between the two drives.
    """
    return DriveConfig(
        delta_b=-drive.delta_b,
        phi=(drive.phi + math.pi) % TWO_PI,
        omega_c=drive.omega_c,
        omega_p=drive.omega_p,
        delta_probe=drive.delta_probe,
    )
