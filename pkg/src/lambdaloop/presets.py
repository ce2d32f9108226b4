"""Named parameter presets for the two simulated regimes.

Boundary units: ordinary frequency in Hz, lengths in meters.  The cold
preset describes a narrow-line medium where the upper excited state is
spectrally remote; the warm preset models a Doppler-broadened vapor by an
enlarged effective excited-state width, with no velocity integration.
"""
from __future__ import annotations

from .core import AtomParams, DriveConfig

PRESETS: dict[str, dict[str, float]] = {
    "fig3-cold": {
        "gamma_e_hz": 6e6,
        "gamma_pop_hz": 10.0,
        "gamma_coh_hz": 10.0,
        "delta_exc_hz": 800e6,
        "od": 0.15,
        "cell_length_m": 0.075,
        "omega_c_hz": 20e3,
        "omega_p_hz": 5e3,
        "delta_b_hz": 0.0,
        "phi_rad": 0.0,
        "delta_probe_hz": 0.0,
    },
    "fig4-warm": {
        "gamma_e_hz": 500e6,
        "gamma_pop_hz": 25.0,
        "gamma_coh_hz": 28.0,
        "delta_exc_hz": 800e6,
        "od": 15.0,
        "cell_length_m": 0.075,
        "omega_c_hz": 240e3,
        "omega_p_hz": 60e3,
        "delta_b_hz": 0.0,
        "phi_rad": 0.0,
        "delta_probe_hz": 0.0,
    },
}


def preset_names() -> tuple[str, ...]:
    return tuple(sorted(PRESETS))


def preset_values(name: str) -> dict[str, float]:
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        ) from None


def preset_atom(name: str) -> AtomParams:
    v = preset_values(name)
    return AtomParams.from_hz(
        gamma_e_hz=v["gamma_e_hz"],
        gamma_pop_hz=v["gamma_pop_hz"],
        gamma_coh_hz=v["gamma_coh_hz"],
        delta_exc_hz=v["delta_exc_hz"],
        optical_depth=v["od"],
        cell_length=v["cell_length_m"],
    )


def preset_drive(name: str) -> DriveConfig:
    v = preset_values(name)
    return DriveConfig.from_hz(
        delta_b_hz=v["delta_b_hz"],
        phi_rad=v["phi_rad"],
        omega_c_hz=v["omega_c_hz"],
        omega_p_hz=v["omega_p_hz"],
        delta_probe_hz=v["delta_probe_hz"],
    )
