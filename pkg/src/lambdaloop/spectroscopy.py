"""Sweeps, weak-probe response spectra, group-velocity class, pulses.

The weak-probe response treats the degenerate drive (control plus probe
carrier at the same frequency, with their relative phase) exactly, and a
probe-mode sideband detuned by delta as the perturbation.  To first order
in the sideband amplitude eta the state acquires a component
rho_+ exp(-i*delta*t) obeying

    (-i*delta - L0) rho_+ = -i [V_p, rho_ss] * eta

with L0 the degenerate generator and V_p = |2><Y| + |1><X| the probe
coupling operator.  The reported susceptibility sample is

    chi(delta) = -(rho_+[1,X] + rho_+[2,Y]) / eta

with the overall sign fixed so that Im(chi) > 0 means absorption and a
rising Re(chi) through two-photon resonance means slow light; the plain
lambda limit then reproduces the textbook EIT lineshape (see tests).
Linearizing around the carrier-inclusive steady state is what gives the
spectra their dependence on the relative phase and the magnetic field:
with the carrier removed, the response at the probe frequency carries
exactly one net factor of the probe field and every phase dependence
cancels identically.

Two independent validations accompany the solver: a time-domain oracle
(bichromatic integration with midpoint-exponential steps, Richardson
extrapolated, plus lock-in extraction at the sideband frequency), and a
thick-medium transfer that co-propagates the sideband together with its
four-wave-mixing conjugate partner through the cell.  The latter feeds
the pulse filter.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .core import (
    AtomParams,
    Curve,
    DriveConfig,
    TWO_PI,
    hz_to_angular,
    input_fields,
)
from .liouvillian import (
    COUPLING_FIELD1,
    COUPLING_FIELD2,
    COUPLING_PROBE,
    TRACE_ROW,
    SteadyStateError,
    circular_template,
    commutator_superop,
    linear_template,
    steady_state_matrix,
)
from .propagation import calibrate_kappa, transmission

#: Overall sign making Im(chi) absorptive and slow light a rising slope.
CHI_SIGN = -1.0

#: Fraction of the peak envelope spectrum below which transfer bins are
#: left at unity.
PULSE_SPECTRUM_CUTOFF = 1e-8

_I16 = np.eye(16, dtype=complex)


class WeakProbeWarning(UserWarning):
    """Weak-probe assumptions are strained for the requested drive."""


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep request.

    grid units follow the boundary convention: radians for phase,
    ordinary Hz for b_field and probe_detuning.
    """

    variable: str
    grid: tuple
    base_drive: DriveConfig
    params: AtomParams
    n_steps: int = 256

    def __post_init__(self):
        if self.variable not in ("phase", "b_field", "probe_detuning"):
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        grid = tuple(float(x) for x in self.grid)
        if not grid:
            raise ValueError("sweep grid must be non-empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("sweep grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)


def phase_grid(n_points: int) -> tuple:
    """Standard [0, 2*pi) phase grid, endpoint excluded."""
    return tuple(np.linspace(0.0, TWO_PI, n_points, endpoint=False))


def sweep_phase(spec: SweepSpec) -> Curve:
    """Probe transmission against the input relative phase."""
    if spec.variable != "phase":
        raise ValueError("sweep_phase requires variable='phase'")
    points = []
    for phi in spec.grid:
        drive = replace(spec.base_drive, phi=phi)
        points.append((phi, transmission(spec.params, drive, spec.n_steps)))
    return Curve("phi_rad", tuple(points))


def sweep_bfield(spec: SweepSpec) -> Curve:
    """Probe transmission against the Zeeman splitting (grid in Hz)."""
    if spec.variable != "b_field":
        raise ValueError("sweep_bfield requires variable='b_field'")
    points = []
    for db_hz in spec.grid:
        drive = replace(spec.base_drive, delta_b=hz_to_angular(db_hz))
        points.append((db_hz, transmission(spec.params, drive, spec.n_steps)))
    return Curve("delta_b_hz", tuple(points))


def modulation_depth(curve: Curve) -> float:
    """Peak-to-peak spread of a real-valued curve."""
    ys = np.real(curve.ys)
    return float(ys.max() - ys.min())


def _solve_sideband(gen, delta_angular, seed):
    """Solve (-i*delta - gen) x = seed; trace-replaced on resonance.

    At delta = 0 the matrix is singular (the generator kernel); the
    physical limit is the trace-free solution, which the trace row picks
    uniquely.
    """
    a = -1j * delta_angular * _I16 - gen
    if delta_angular == 0.0:
        a = a.copy()
        a[0, :] = TRACE_ROW * np.max(np.abs(gen))
        seed = seed.copy()
        seed[0] = 0.0
    try:
        vec = np.linalg.solve(a, seed)
        vec += np.linalg.solve(a, seed - a @ vec)
    except np.linalg.LinAlgError as exc:
        raise SteadyStateError(
            f"sideband response solve failed at delta = "
            f"{delta_angular / TWO_PI:.6g} Hz: {exc}"
        ) from exc
    if not np.all(np.isfinite(vec)):
        raise SteadyStateError(
            f"sideband response diverged at delta = "
            f"{delta_angular / TWO_PI:.6g} Hz"
        )
    return vec


class _SidebandSolver:
    """Harmonic-balance solver bound to one degenerate operating point."""

    def __init__(self, params: AtomParams, drive: DriveConfig):
        if drive.omega_p > drive.omega_c / 3.0:
            warnings.warn(
                "probe carrier exceeds a third of the control; the "
                "weak-probe reading of the response is strained",
                WeakProbeWarning,
                stacklevel=3,
            )
        self.params = params
        self.drive = drive
        template = linear_template(params)
        self.gen0 = template.generator(
            drive.delta_b, drive.omega_c, drive.probe_amplitude
        )
        self.rho0 = steady_state_matrix(self.gen0)
        self._up = commutator_superop(COUPLING_PROBE)
        self._dn = commutator_superop(COUPLING_PROBE.conj().T)
        self.seed = self._up @ self.rho0.reshape(-1)

    def response_vector(self, delta_angular: float) -> np.ndarray:
        """First-order sideband component per unit sideband Rabi."""
        return _solve_sideband(self.gen0, delta_angular, self.seed)

    def chi(self, delta_angular: float) -> complex:
        rho_plus = self.response_vector(delta_angular).reshape(4, 4)
        return CHI_SIGN * (rho_plus[0, 2] + rho_plus[1, 3])

    def truncation_estimate(self, delta_angular: float) -> float:
        """Fractional second-harmonic feedback at the finite carrier.

        Takes the probe carrier magnitude as the worst-case sideband
        amplitude and estimates the relative first-harmonic correction
        the dropped n = 2 harmonic would feed back.
        """
        eta = self.drive.omega_p
        if eta == 0.0:
            return 0.0
        first = self.response_vector(delta_angular)
        second = _solve_sideband(
            self.gen0, 2.0 * delta_angular, self._up @ first
        )
        back = _solve_sideband(self.gen0, delta_angular, self._dn @ second)
        norm_first = np.linalg.norm(first)
        if norm_first == 0.0:
            return 0.0
        return float(eta**2 * np.linalg.norm(back) / norm_first)


def weak_probe_response(params: AtomParams, drive: DriveConfig) -> complex:
    """Complex susceptibility sample chi at drive.delta_probe.

    The real part tracks the probe refractive index (arbitrary units),
    the imaginary part the absorption.  Warns when the dropped higher
    sideband harmonics would matter at the percent level.
    """
    solver = _SidebandSolver(params, drive)
    estimate = solver.truncation_estimate(drive.delta_probe)
    if estimate > 0.01:
        warnings.warn(
            f"first-sideband truncation residual estimate {estimate:.3e} "
            "exceeds 1%",
            WeakProbeWarning,
            stacklevel=2,
        )
    return solver.chi(drive.delta_probe)


def refractive_spectrum(spec: SweepSpec) -> Curve:
    """chi(delta) sampled over a probe-detuning grid (Hz)."""
    if spec.variable != "probe_detuning":
        raise ValueError(
            "refractive_spectrum requires variable='probe_detuning'"
        )
    solver = _SidebandSolver(spec.params, spec.base_drive)
    points = [(d_hz, solver.chi(hz_to_angular(d_hz))) for d_hz in spec.grid]
    return Curve("delta_hz", tuple(points))


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares slope of Re(chi) around zero detuning."""

    slope_per_hz: float
    classification: str
    stderr_per_hz: float


def group_velocity_class(spectrum: Curve, window_hz: float = 10.0) -> SlopeFit:
    """Classify slow/fast/flat light from the dispersion slope.

    Fits Re(y) over the points with |x| <= window_hz.  A rising slope
    means the group index exceeds unity (slow light).  The flat band is
    1e-3 of the spectrum's peak |Re| per window width.
    """
    xs = spectrum.xs
    ys = np.real(spectrum.ys)
    mask = np.abs(xs) <= window_hz
    if int(mask.sum()) < 5:
        raise ValueError(
            f"need at least 5 points within +/-{window_hz} Hz, have "
            f"{int(mask.sum())}"
        )
    x = xs[mask]
    y = ys[mask]
    design = np.vstack([x, np.ones_like(x)]).T
    coef, res, *_ = np.linalg.lstsq(design, y, rcond=None)
    slope = float(coef[0])
    dof = len(x) - 2
    var = float(res[0]) / dof if (dof > 0 and res.size) else 0.0
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(var / sxx) if sxx > 0 else math.inf
    tol = 1e-3 * float(np.max(np.abs(ys))) / window_hz
    if slope > tol:
        label = "slow"
    elif slope < -tol:
        label = "fast"
    else:
        label = "flat"
    return SlopeFit(slope_per_hz=slope, classification=label,
                    stderr_per_hz=stderr)


def _chi_timedomain_once(gen0, rho_start, eta, delta, up, dn, periods,
                         steps_per_period, settle_time):
    period = TWO_PI / abs(delta)
    dt = period / steps_per_period
    settle_steps = int(math.ceil(settle_time / dt))

    def step(rho, t_mid):
        gen = gen0 + eta * (
            np.exp(-1j * delta * t_mid) * up
            + np.exp(1j * delta * t_mid) * dn
        )
        return expm(gen * dt) @ rho

    rho = rho_start
    t = 0.0
    for _ in range(settle_steps):
        rho = step(rho, t + 0.5 * dt)
        t += dt
    n = periods * steps_per_period
    acc = 0.0 + 0.0j
    for _ in range(n):
        rho = step(rho, t + 0.5 * dt)
        t += dt
        mat = rho.reshape(4, 4)
        acc += (mat[0, 2] + mat[1, 3]) * np.exp(1j * delta * t)
    return acc / n


def chi_probe_timedomain(params: AtomParams, drive: DriveConfig,
                         delta_hz: float, *, sideband_fraction: float = 0.02,
                         periods: int = 2,
                         steps_per_period: int = 512) -> complex:
    """Brute-force chi: integrate the bichromatic master equation.

    Starts from the degenerate steady state, adds a weak probe-mode
    sideband at delta_hz, steps the generator with frozen midpoint
    exponentials and lock-in extracts the sideband-frequency Fourier
    coefficient of rho_1X + rho_2Y over an integer number of beat
    periods.  The frozen-phase staircase leaves an error linear in the
    step size, removed by one Richardson extrapolation (run at n and 2n
    steps per period).  Independent of the harmonic-balance linear
    solve.
    """
    if delta_hz == 0.0:
        raise ValueError("the lock-in oracle needs a nonzero detuning")
    delta = hz_to_angular(delta_hz)
    gen0 = linear_template(params).generator(
        drive.delta_b, drive.omega_c, drive.probe_amplitude
    )
    rho_start = steady_state_matrix(gen0).reshape(-1)
    eta = sideband_fraction * (drive.omega_p or drive.omega_c)
    up = commutator_superop(COUPLING_PROBE)
    dn = commutator_superop(COUPLING_PROBE.conj().T)
    settle_time = 10.0 / min(params.gamma_pop, params.gamma_coh)

    coarse = _chi_timedomain_once(
        gen0, rho_start, eta, delta, up, dn, periods, steps_per_period,
        settle_time,
    )
    fine = _chi_timedomain_once(
        gen0, rho_start, eta, delta, up, dn, periods, 2 * steps_per_period,
        settle_time,
    )
    extrapolated = 2.0 * fine - coarse
    return CHI_SIGN * extrapolated / eta


def sideband_transfer(params: AtomParams, drive: DriveConfig,
                      deltas_hz, n_steps: int = 128) -> np.ndarray:
    """Thick-medium transfer of a probe-envelope modulation component.

    Co-integrates the degenerate carrier pair together with a probe-mode
    sideband at -delta and its four-wave-mixing conjugate partner at
    +delta through the cell; the pair is seeded the way a real envelope
    modulation populates it (equal amplitudes).  At each integrator
    stage the carrier steady state feeds the carrier derivatives and the
    two first-order responses.  Returns the output probe-mode modulation
    per unit input, one complex value per entry of deltas_hz.
    """
    deltas = np.atleast_1d(np.asarray(deltas_hz, dtype=float))
    kappa = calibrate_kappa(params)
    if kappa == 0.0:
        return np.ones(deltas.shape, dtype=complex)

    template = circular_template(params)
    up1 = commutator_superop(COUPLING_FIELD1)
    up2 = commutator_superop(COUPLING_FIELD2)
    dn1 = commutator_superop(COUPLING_FIELD1.conj().T)
    dn2 = commutator_superop(COUPLING_FIELD2.conj().T)
    length = params.cell_length
    h = length / n_steps
    fields0 = input_fields(drive)
    sb = 1.0 / math.sqrt(2.0)

    out = np.empty(deltas.shape, dtype=complex)
    for i, d_hz in enumerate(deltas):
        delta = hz_to_angular(float(d_hz))

        def rhs(state):
            f1, f2, e1, e2, m1c, m2c = state
            gen = template.generator(drive.delta_b, f1, f2)
            rho = steady_state_matrix(gen)
            vec = rho.reshape(-1)
            df1 = -1j * kappa * (rho[1, 2] + rho[0, 2])
            df2 = -1j * kappa * (rho[1, 3] - rho[0, 3])
            low = _solve_sideband(
                gen, delta,
                (e1 * up1 + e2 * up2 + np.conj(m1c) * dn1
                 + np.conj(m2c) * dn2) @ vec,
            ).reshape(4, 4)
            de1 = -1j * kappa * (low[1, 2] + low[0, 2])
            de2 = -1j * kappa * (low[1, 3] - low[0, 3])
            high = _solve_sideband(
                gen, -delta,
                (np.conj(m1c) * up1 + np.conj(m2c) * up2 + e1 * dn1
                 + e2 * dn2) @ vec,
            ).reshape(4, 4)
            dm1 = -1j * kappa * (high[1, 2] + high[0, 2])
            dm2 = -1j * kappa * (high[1, 3] - high[0, 3])
            return np.array(
                [df1, df2, de1, de2, np.conj(dm1), np.conj(dm2)],
                dtype=complex,
            )

        state = np.array(
            [fields0.omega1, fields0.omega2, sb, -sb, sb, -sb],
            dtype=complex,
        )
        for _ in range(n_steps):
            k1 = rhs(state)
            k2 = rhs(state + 0.5 * h * k1)
            k3 = rhs(state + 0.5 * h * k2)
            k4 = rhs(state + h * k3)
            state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i] = (state[2] - state[3]) / math.sqrt(2.0)
    return out


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian probe-envelope pulse riding the degenerate carrier."""

    fwhm: float                       # seconds
    peak_omega_p: float               # angular frequency
    carrier_detuning: float = 0.0     # angular frequency
    time_window: float | None = None  # seconds; defaults to 8 * fwhm
    n_samples: int = 1024

    def __post_init__(self):
        if self.fwhm <= 0.0:
            raise ValueError("fwhm must be positive")
        window = (
            self.time_window if self.time_window is not None
            else 8.0 * self.fwhm
        )
        if window < 8.0 * self.fwhm:
            raise ValueError("time_window must be at least 8 * fwhm")
        object.__setattr__(self, "time_window", window)
        n = self.n_samples
        if n < 256 or (n & (n - 1)) != 0:
            raise ValueError("n_samples must be a power of two, >= 256")

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * (self.time_window / self.n_samples)

    @property
    def envelope(self) -> np.ndarray:
        t0 = 0.5 * self.time_window
        return np.exp(
            -4.0 * math.log(2.0) * (self.times - t0) ** 2 / self.fwhm**2
        )


def apply_transfer(times: np.ndarray, envelope: np.ndarray,
                   transfer_at_hz) -> np.ndarray:
    """Filter an envelope with a transfer function of sideband detuning.

    A spectral component exp(+2*pi*i*f*t) of the envelope is a sideband
    at detuning delta = -f in the exp(-i*delta*t) convention used by the
    response solver.  Bins with negligible spectral weight keep unit
    transfer.
    """
    dt = times[1] - times[0]
    spectrum = np.fft.fft(envelope)
    sideband_hz = -np.fft.fftfreq(len(envelope), d=dt)
    gains = np.ones(len(envelope), dtype=complex)
    mask = np.abs(spectrum) > PULSE_SPECTRUM_CUTOFF * np.max(np.abs(spectrum))
    gains[mask] = transfer_at_hz(sideband_hz[mask])
    return np.fft.ifft(spectrum * gains)


def peak_time(times: np.ndarray, values: np.ndarray) -> float:
    """Quadratic-interpolated position of the maximum of a sampled curve."""
    idx = int(np.argmax(values))
    if idx == 0 or idx == len(values) - 1:
        return float(times[idx])
    y0, y1, y2 = values[idx - 1], values[idx], values[idx + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom == 0.0:
        return float(times[idx])
    shift = 0.5 * (y0 - y2) / denom
    return float(times[idx] + shift * (times[1] - times[0]))


def pulse_response(params: AtomParams, drive: DriveConfig, pulse: PulseSpec,
                   n_steps: int = 128) -> tuple[Curve, float]:
    """Propagate a Gaussian probe envelope as a linear spectral filter.

    Each envelope frequency component is multiplied by the thick-medium
    modulation transfer at its detuning (offset by the pulse carrier
    detuning) and recomposed.  Returns the complex output envelope and
    the fractional peak delay, output peak minus input peak over the
    FWHM; negative values are advances.
    """
    if drive.omega_p > drive.omega_c / 3.0:
        warnings.warn(
            "probe carrier exceeds a third of the control; the "
            "weak-probe reading of the response is strained",
            WeakProbeWarning,
            stacklevel=2,
        )
    times = pulse.times
    envelope = pulse.envelope
    nyquist_hz = 0.5 * pulse.n_samples / pulse.time_window
    needed_hz = 2.3 / pulse.fwhm + abs(pulse.carrier_detuning) / TWO_PI
    if needed_hz > nyquist_hz:
        raise ValueError(
            f"pulse bandwidth needs +/-{needed_hz:.3g} Hz but the sample "
            f"grid only resolves +/-{nyquist_hz:.3g} Hz"
        )
    carrier_hz = pulse.carrier_detuning / TWO_PI

    def transfer_at(deltas_hz):
        return sideband_transfer(
            params, drive, deltas_hz + carrier_hz, n_steps
        )

    out = apply_transfer(times, envelope, transfer_at)
    delay = peak_time(times, np.abs(out)) - peak_time(times, envelope)
    curve = Curve("time_s", tuple(zip(times, out)))
    return curve, delay / pulse.fwhm
