import warnings

import numpy as np
import pytest

from lambdaloop import (
    AtomParams,
    Curve,
    DriveConfig,
    PulseSpec,
    SweepSpec,
    WeakProbeWarning,
    chi_probe_timedomain,
    group_velocity_class,
    hz_to_angular,
    modulation_depth,
    phase_grid,
    pulse_response,
    refractive_spectrum,
    sideband_transfer,
    substitution_image,
    sweep_bfield,
    sweep_phase,
    transmission,
    weak_probe_response,
)
from lambdaloop.spectroscopy import apply_transfer, peak_time


def spectrum_for(params, drive, grid_hz, n_steps=256):
    spec = SweepSpec("probe_detuning", tuple(grid_hz), drive, params, n_steps)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WeakProbeWarning)
        return refractive_spectrum(spec)


class TestTwoLevelLimit:
    def test_matches_closed_form(self, cold_atom):
        # Control off, vanishing probe carrier: the sideband sees two
        # independent optical transitions from the half-filled grounds,
        #   chi(d) = (i/2) [1/(G2 - i*d) + 1/(G2 + i*(Delta - d))]
        # with G2 = (gamma_e + gamma_coh)/2.
        g2 = 0.5 * (cold_atom.gamma_e + cold_atom.gamma_coh)
        delta_exc = cold_atom.delta_exc

        def analytic(d_hz):
            da = hz_to_angular(d_hz)
            return 0.5j * (
                1.0 / (g2 - 1j * da) + 1.0 / (g2 + 1j * (delta_exc - da))
            )

        for d_hz in (0.0, 2e6, -3.5e6, 9e6):
            drive = DriveConfig.from_hz(0.0, 0.0, 0.0, 1.0,
                                        delta_probe_hz=d_hz)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", WeakProbeWarning)
                got = weak_probe_response(cold_atom, drive)
            assert got == pytest.approx(analytic(d_hz), rel=1e-6)

    def test_absorptive_sign_and_anomalous_dispersion(self, cold_atom):
        # Bare line: absorption positive, dispersion falling at center.
        def chi(d_hz):
            drive = DriveConfig.from_hz(0.0, 0.0, 0.0, 1.0,
                                        delta_probe_hz=d_hz)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", WeakProbeWarning)
                return weak_probe_response(cold_atom, drive)

        assert chi(0.0).imag > 0
        assert chi(1e6).real < chi(-1e6).real


class TestTransparencyWindow:
    def test_absorption_dip_and_slow_light(self, cold_atom):
        # Control on resonance, no static field: transparency at the
        # two-photon point with normal (rising) dispersion across it.
        width_hz = (
            hz_to_angular(20e3) ** 2 / cold_atom.gamma_e / (2 * np.pi)
        )
        drive = DriveConfig.from_hz(0.0, 0.0, 20e3, 1.0)
        grid = (-3 * width_hz, -width_hz, -3.0, 0.0, 3.0, width_hz,
                3 * width_hz)
        curve = spectrum_for(cold_atom, drive, sorted(grid))
        ys = dict(zip(curve.xs, curve.ys))
        assert abs(ys[0.0].imag) < abs(ys[width_hz].imag)
        assert ys[3.0].real > ys[-3.0].real
        fit = group_velocity_class(curve, window_hz=width_hz)
        assert fit.classification == "slow"


class TestOracleAgreement:
    def test_harmonic_balance_vs_lockin(self, warm_atom):
        drive = DriveConfig.from_hz(-91.0, 0.35, 240e3, 60e3)
        for d_hz in (-15.0, 20.0):
            drive_d = DriveConfig(
                drive.delta_b, drive.phi, drive.omega_c, drive.omega_p,
                hz_to_angular(d_hz),
            )
            hb = weak_probe_response(warm_atom, drive_d)
            td = chi_probe_timedomain(warm_atom, drive, d_hz)
            assert abs(hb - td) / abs(hb) < 0.02

    def test_lockin_linear_in_sideband(self, warm_atom):
        drive = DriveConfig.from_hz(-91.0, 0.0, 240e3, 60e3)
        a = chi_probe_timedomain(warm_atom, drive, 20.0,
                                 sideband_fraction=0.02)
        b = chi_probe_timedomain(warm_atom, drive, 20.0,
                                 sideband_fraction=0.01)
        assert abs(a - b) / abs(a) < 0.005

    def test_rejects_zero_detuning(self, warm_atom, warm_drive):
        with pytest.raises(ValueError, match="nonzero"):
            chi_probe_timedomain(warm_atom, warm_drive, 0.0)


class TestResponseProperties:
    def test_substitution_symmetry_of_spectrum(self, warm_atom):
        drive = DriveConfig.from_hz(40.0, 1.1, 240e3, 60e3)
        grid = (-60.0, -20.0, -5.0, 0.0, 5.0, 20.0, 60.0)
        direct = spectrum_for(warm_atom, drive, grid)
        image = spectrum_for(warm_atom, substitution_image(drive), grid)
        for (_, a), (_, b) in zip(direct.points, image.points):
            assert abs(a - b) < 1e-8 * abs(a)

    def test_linear_regime_carrier_independence(self, cold_atom):
        # Small carriers: halving the probe leaves chi unchanged.
        def chi(op_hz):
            drive = DriveConfig.from_hz(0.0, 0.4, 20e3, op_hz,
                                        delta_probe_hz=15.0)
            return weak_probe_response(cold_atom, drive)

        assert abs(chi(100.0) - chi(50.0)) / abs(chi(100.0)) < 0.005

    def test_resonant_point_continuous(self, cold_atom):
        drive = DriveConfig.from_hz(25.0, 0.7, 20e3, 1e3)
        grid = (-1.0, -0.5, 0.0, 0.5, 1.0)
        curve = spectrum_for(cold_atom, drive, grid)
        ys = curve.ys
        mid = ys[2]
        neighbors = 0.5 * (ys[1] + ys[3])
        assert abs(mid - neighbors) < 0.05 * abs(mid)

    def test_warns_on_strong_probe(self, warm_atom):
        drive = DriveConfig.from_hz(0.0, 0.0, 240e3, 120e3)
        with pytest.warns(WeakProbeWarning):
            weak_probe_response(warm_atom, drive)


class TestGroupVelocityClass:
    @staticmethod
    def synthetic(slope):
        xs = np.linspace(-20, 20, 21)
        return Curve("delta_hz", tuple(zip(xs, slope * xs + 0.3)))

    def test_rising_is_slow(self):
        fit = group_velocity_class(self.synthetic(2.0))
        assert fit.classification == "slow"
        assert fit.slope_per_hz == pytest.approx(2.0)

    def test_falling_is_fast(self):
        assert group_velocity_class(self.synthetic(-1.5)).classification == "fast"

    def test_flat(self):
        assert group_velocity_class(self.synthetic(0.0)).classification == "flat"

    def test_rescale_invariant_classification(self):
        xs = np.linspace(-20, 20, 21)
        ys = np.sin(xs / 30.0) + 0.1
        a = group_velocity_class(Curve("delta_hz", tuple(zip(xs, ys))))
        b = group_velocity_class(Curve("delta_hz", tuple(zip(xs, 7.3 * ys))))
        assert a.classification == b.classification
        assert b.slope_per_hz == pytest.approx(7.3 * a.slope_per_hz)

    def test_needs_five_points(self):
        xs = np.linspace(-100, 100, 9)
        curve = Curve("delta_hz", tuple(zip(xs, xs)))
        with pytest.raises(ValueError, match="at least 5"):
            group_velocity_class(curve, window_hz=20.0)


class TestSweeps:
    def test_cold_modulation_ordering(self, cold_atom):
        grid = phase_grid(8)
        depths = {}
        for db_hz in (0.0, 10.0, 80.0):
            drive = DriveConfig.from_hz(db_hz, 0.0, 20e3, 5e3)
            spec = SweepSpec("phase", grid, drive, cold_atom, 96)
            depths[db_hz] = modulation_depth(sweep_phase(spec))
        assert depths[80.0] > depths[10.0] > depths[0.0]
        assert depths[80.0] / depths[10.0] > 2.0

    def test_warm_intrinsic_sensitivity(self, warm_atom):
        drive = DriveConfig.from_hz(0.0, 0.0, 240e3, 60e3)
        spec = SweepSpec("phase", phase_grid(16), drive, warm_atom, 96)
        curve = sweep_phase(spec)
        assert modulation_depth(curve) > 0.1 * float(np.mean(curve.ys))

    def test_bfield_mirror(self, warm_atom):
        phi = 0.9
        grid = tuple(np.linspace(-60.0, 60.0, 7))
        curve_a = sweep_bfield(SweepSpec(
            "b_field", grid, DriveConfig.from_hz(0, phi, 240e3, 60e3),
            warm_atom, 96,
        ))
        curve_b = sweep_bfield(SweepSpec(
            "b_field", grid,
            DriveConfig.from_hz(0, phi + np.pi, 240e3, 60e3),
            warm_atom, 96,
        ))
        mirrored = dict(zip(-curve_b.xs, curve_b.ys))
        for x, y in curve_a.points:
            assert abs(y - mirrored[-(-x)]) < 1e-8

    def test_single_point_grid_is_transmission(self, cold_atom):
        drive = DriveConfig.from_hz(40.0, 0.3, 20e3, 5e3)
        spec = SweepSpec("b_field", (40.0,), drive, cold_atom, 96)
        curve = sweep_bfield(spec)
        assert curve.ys[0] == pytest.approx(
            transmission(cold_atom, drive, 96), abs=1e-14
        )

    def test_warm_curves_split_at_zero_field(self, warm_atom):
        values = [
            transmission(
                warm_atom, DriveConfig.from_hz(0.0, phi, 240e3, 60e3), 96
            )
            for phi in (0.0, np.pi / 2)
        ]
        assert abs(values[0] - values[1]) > 0.01 * max(values)

    def test_grid_validation(self, cold_atom, cold_drive):
        with pytest.raises(ValueError, match="increasing"):
            SweepSpec("phase", (1.0, 1.0), cold_drive, cold_atom)
        with pytest.raises(ValueError, match="non-empty"):
            SweepSpec("phase", (), cold_drive, cold_atom)
        with pytest.raises(ValueError, match="variable"):
            SweepSpec("voltage", (0.0,), cold_drive, cold_atom)


class TestPulse:
    def test_spec_validation(self):
        with pytest.raises(ValueError, match="power of two"):
            PulseSpec(fwhm=1e-3, peak_omega_p=1.0, n_samples=300)
        with pytest.raises(ValueError, match="time_window"):
            PulseSpec(fwhm=1e-3, peak_omega_p=1.0, time_window=4e-3)
        with pytest.raises(ValueError, match="fwhm"):
            PulseSpec(fwhm=0.0, peak_omega_p=1.0)

    def test_free_space_identity(self, cold_atom, cold_drive):
        atom = AtomParams(
            cold_atom.gamma_e, cold_atom.gamma_pop, cold_atom.gamma_coh,
            cold_atom.delta_exc, 0.0, cold_atom.cell_length,
        )
        pulse = PulseSpec(fwhm=5e-3, peak_omega_p=hz_to_angular(5e3),
                          n_samples=256)
        curve, delay = pulse_response(atom, cold_drive, pulse)
        assert abs(delay) < 1e-12
        assert np.max(np.abs(curve.ys - pulse.envelope)) < 1e-12

    def test_analytic_delay_filter(self):
        pulse = PulseSpec(fwhm=5e-3, peak_omega_p=1.0, n_samples=512)
        t_delay = 1.2e-3

        def transfer(deltas_hz):
            return np.exp(1j * hz_to_angular(deltas_hz) * t_delay)

        out = apply_transfer(pulse.times, pulse.envelope, transfer)
        got = peak_time(pulse.times, np.abs(out)) - peak_time(
            pulse.times, pulse.envelope
        )
        assert got == pytest.approx(t_delay, rel=1e-3)

    def test_bandwidth_guard(self, cold_atom, cold_drive):
        pulse = PulseSpec(fwhm=1e-3, peak_omega_p=1.0, time_window=0.1,
                          n_samples=256)
        with pytest.raises(ValueError, match="bandwidth"):
            pulse_response(cold_atom, cold_drive, pulse)

    def test_transfer_grid_converged(self, warm_atom, warm_drive):
        coarse = sideband_transfer(warm_atom, warm_drive, [12.0], 96)[0]
        fine = sideband_transfer(warm_atom, warm_drive, [12.0], 192)[0]
        assert abs(coarse - fine) / abs(fine) < 1e-5

    def test_narrowband_delay_matches_phase_slope(self, warm_atom, warm_drive):
        # Stationary-phase estimate: group delay equals the transfer
        # phase slope at band center for a narrowband pulse.
        pulse = PulseSpec(fwhm=50e-3, peak_omega_p=hz_to_angular(60e3),
                          n_samples=256)
        _, frac = pulse_response(warm_atom, warm_drive, pulse)
        h_hz = 2.0
        lo, hi = sideband_transfer(warm_atom, warm_drive, [-h_hz, h_hz], 128)
        slope = (np.angle(hi) - np.angle(lo)) / (2 * hz_to_angular(h_hz))
        assert frac * pulse.fwhm == pytest.approx(slope, rel=0.1)
