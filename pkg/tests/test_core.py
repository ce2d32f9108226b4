import numpy as np
import pytest

from lambdaloop import (
    AtomParams,
    Curve,
    DensityMatrix,
    DriveConfig,
    FieldPair,
    basis_change_state,
    to_circular,
    to_linear,
    zeeman_shift,
)
from lambdaloop.core import RateHierarchyWarning, hz_to_angular

# CODATA 2022 value typed from the table, independent of the
# implementation's constant source.
MU_B_OVER_H = 13.9962449171e9  # Hz/T


class TestZeemanShift:
    def test_zero_field(self):
        assert zeeman_shift(0.0, 0.7, 2) == 0.0

    def test_odd_in_field(self):
        a = zeeman_shift(2.5e-6, 0.5, 1)
        b = zeeman_shift(-2.5e-6, 0.5, 1)
        assert a == -b

    def test_linear_in_m(self):
        assert zeeman_shift(1e-6, 0.5, 2) == pytest.approx(
            2 * zeeman_shift(1e-6, 0.5, 1), rel=1e-14
        )

    def test_codata_microtesla(self):
        # g = 1/2, m = 1, B = 1 uT -> 6998.12 Hz splitting
        expected_hz = 0.5 * MU_B_OVER_H * 1e-6
        got = zeeman_shift(1e-6, 0.5, 1)
        assert got == pytest.approx(2 * np.pi * expected_hz, rel=1e-9)

    def test_nanotesla_is_seven_hertz(self):
        got_hz = zeeman_shift(1e-9, 0.5, 1) / (2 * np.pi)
        assert got_hz == pytest.approx(7.0, rel=1e-3)


class TestFieldTransforms:
    def test_pure_control_splits_equally(self):
        pair = to_circular(1.0, 0.0)
        assert pair.omega1 == pytest.approx(1 / np.sqrt(2))
        assert pair.omega2 == pytest.approx(1 / np.sqrt(2))

    def test_pure_probe_antisymmetric(self):
        pair = to_circular(0.0, 1.0)
        assert pair.omega1 == pytest.approx(1 / np.sqrt(2))
        assert pair.omega2 == pytest.approx(-1 / np.sqrt(2))

    def test_to_linear_examples(self):
        s = 1 / np.sqrt(2)
        assert to_linear(FieldPair(s, s)) == pytest.approx((1.0, 0.0))
        assert to_linear(FieldPair(s, -s)) == pytest.approx((0.0, 1.0))

    def test_round_trip(self, rng):
        for _ in range(50):
            c, p = rng.normal(size=2) + 1j * rng.normal(size=2)
            back = to_linear(to_circular(c, p))
            assert abs(back[0] - c) < 1e-14 * max(1.0, abs(c))
            assert abs(back[1] - p) < 1e-14 * max(1.0, abs(p))

    def test_power_conservation(self, rng):
        for _ in range(50):
            c, p = rng.normal(size=2) + 1j * rng.normal(size=2)
            pair = to_circular(c, p)
            assert pair.total_power == pytest.approx(
                abs(c) ** 2 + abs(p) ** 2, rel=1e-14
            )

    def test_nan_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            FieldPair(complex(np.nan), 0j)


class TestBasisChangeState:
    def test_unpolarized_unchanged(self):
        rho = DensityMatrix.from_matrix(np.diag([0, 0, 0.5, 0.5]))
        out = basis_change_state(rho, "circular-to-linear")
        assert np.allclose(out.rho, rho.rho, atol=1e-15)
        assert out.basis == "linear"

    def test_pure_circular_ground(self):
        rho = DensityMatrix.from_matrix(np.diag([0, 0, 1.0, 0]))
        out = basis_change_state(rho, "circular-to-linear")
        assert out.element("X", "X") == pytest.approx(0.5)
        assert out.element("Y", "Y") == pytest.approx(0.5)
        assert out.element("X", "Y") == pytest.approx(0.5)

    def test_spectrum_preserved(self, rng):
        for _ in range(20):
            a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            rho = a @ a.conj().T
            rho /= np.trace(rho).real
            dm = DensityMatrix.from_matrix(rho)
            out = basis_change_state(dm, "circular-to-linear")
            assert np.trace(out.rho) == pytest.approx(1.0, abs=1e-12)
            assert np.max(np.abs(out.rho - out.rho.conj().T)) < 1e-12
            ev_in = np.sort(np.linalg.eigvalsh(rho))
            ev_out = np.sort(np.linalg.eigvalsh(out.rho))
            assert np.allclose(ev_in, ev_out, atol=1e-12)

    def test_round_trip(self, rng):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        dm = DensityMatrix.from_matrix(rho)
        back = basis_change_state(
            basis_change_state(dm, "circular-to-linear"),
            "linear-to-circular",
        )
        assert np.allclose(back.rho, rho, atol=1e-14)

    def test_wrong_source_basis(self):
        rho = DensityMatrix.from_matrix(np.diag([0, 0, 0.5, 0.5]),
                                        basis="linear")
        with pytest.raises(ValueError, match="linear basis"):
            basis_change_state(rho, "circular-to-linear")


class TestAtomParams:
    def test_rejects_nonpositive_rates(self):
        with pytest.raises(ValueError, match="gamma_e"):
            AtomParams(0.0, 1.0, 1.0, 1.0, 0.1, 0.07)

    def test_rejects_negative_od(self):
        with pytest.raises(ValueError, match="optical_depth"):
            AtomParams.from_hz(6e6, 10, 10, 800e6, -0.1, 0.07)

    def test_warns_on_marginal_hierarchy(self):
        with pytest.warns(RateHierarchyWarning):
            AtomParams.from_hz(100.0, 50.0, 50.0, 800e6, 0.1, 0.07)

    def test_from_hz_applies_two_pi(self):
        atom = AtomParams.from_hz(6e6, 10, 10, 800e6, 0.15, 0.075)
        assert atom.gamma_e == pytest.approx(2 * np.pi * 6e6)
        assert atom.delta_exc == pytest.approx(2 * np.pi * 800e6)


class TestDriveConfig:
    def test_phi_reduced(self):
        drive = DriveConfig(0.0, 7.5, 1.0, 0.5)
        assert 0.0 <= drive.phi < 2 * np.pi
        assert drive.phi == pytest.approx(7.5 - 2 * np.pi)

    def test_negative_rabi_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            DriveConfig(0.0, 0.0, -1.0, 0.5)

    def test_probe_amplitude_carries_phase(self):
        drive = DriveConfig.from_hz(0.0, np.pi / 3, 0.0, 10.0)
        amp = drive.probe_amplitude
        assert abs(amp) == pytest.approx(hz_to_angular(10.0))
        assert np.angle(amp) == pytest.approx(np.pi / 3)


class TestDensityMatrixValidation:
    def test_trace_enforced(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix.from_matrix(np.diag([0, 0, 0.6, 0.5]))

    def test_hermiticity_enforced(self):
        bad = np.diag([0, 0, 0.5, 0.5]).astype(complex)
        bad[0, 1] = 1e-6
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix.from_matrix(bad)

    def test_positivity_enforced(self):
        bad = np.diag([-1e-3, 1e-3, 0.5, 0.5]).astype(complex)
        with pytest.raises(ValueError, match="eigenvalue"):
            DensityMatrix.from_matrix(bad)


class TestCurve:
    def test_monotone_required(self):
        with pytest.raises(ValueError, match="increasing"):
            Curve("x", ((0.0, 1.0), (0.0, 2.0)))

    def test_accessors(self):
        curve = Curve("x", ((0.0, 1.0), (1.0, 2.0), (2.5, -1.0)))
        assert len(curve) == 3
        assert np.allclose(curve.xs, [0.0, 1.0, 2.5])
        assert np.allclose(curve.ys, [1.0, 2.0, -1.0])
