"""Complex frequency-domain transfer function of one amplifier output mode.

A mode is described by a Lorentzian intensity-gain line sitting on an
optional flat background (light from the unseeded conical emission) plus a
dispersion phase. The phase is odd about line center with slope equal to
the configured group delay, wrapped in a broad Lorentzian envelope so it
rolls off far outside the line:

    |H|^2  = bg + (G0 - bg) * L(d),      L(d) = 1 / (1 + (2 d / Gamma)^2)
    arg H  = 2 pi tau_d * d * Lp(d),     Lp(d) = L(d / PHASE_ENVELOPE_WIDTH)

with d the detuning from line center. The envelope must be much wider than
the gain line itself: with the envelope width tied to Gamma, the strong
phase curvature across the pulse spectrum drags the measured peak delay
tens of percent below tau_d, while the measured delays track 1/Gamma
closely. A width factor of 10 keeps the peak-delay error under 1% for the
operating pulse/linewidth ratio while preserving a bounded, causal-shaped
phase.

The directly parameterized phase deliberately does NOT follow from the
gain magnitude by a Kramers-Kronig relation: a clean causal Lorentzian
amplifier at gain 1e7 would delay by ln(G)/(2 pi Gamma) = 1.7 us, far
above the measured 1/Gamma = 0.68 us. ``kk_consistent_delay`` exposes
that alternative model so the gap stays visible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .medium import (
    BandwidthModel,
    MediumConfig,
    _check_mode,
    bandwidth_vs_input,
    bandwidth_vs_pump,
    delay_from_bandwidth,
    intensity_gain,
)

__all__ = [
    "PHASE_ENVELOPE_WIDTH",
    "MODE_DELAY_SCALE",
    "SpectralResponse",
    "make_response",
    "amplitude_at",
    "unity_response",
    "kk_consistent_delay",
]

PHASE_ENVELOPE_WIDTH = 10.0

# Measured group delays at the slow-light operating point (0.7 photons
# average, 587 ns pulses) differ between the modes beyond the 1/Gamma
# prediction: the conjugate emerges earlier, a known feature of the
# double-lambda mixing dynamics. The per-mode factors below rescale
# 1/Gamma so end-to-end propagation reproduces the measured 672 ns /
# 592 ns pair (an 80 ns probe-conjugate split). A multiplicative factor,
# unlike an additive shift, keeps delay-vs-power sweeps inside the
# 1/(s sqrt(P) + z) family that the sweep fits assume.
MODE_DELAY_SCALE = {"probe": 1.004045819685, "conjugate": 0.913887699770}


@dataclass(frozen=True)
class SpectralResponse:
    """Immutable transfer-function parameters of one output mode."""

    center_detuning_MHz: float
    fwhm_MHz: float
    peak_gain: float
    group_delay_ns: float
    mode: str = "probe"
    background_gain: float = 0.0

    def __post_init__(self) -> None:
        _check_mode(self.mode)
        if not self.fwhm_MHz > 0:
            raise ConfigurationError("fwhm_MHz must be > 0")
        if not self.peak_gain > 0:
            raise ConfigurationError("peak_gain must be > 0")
        if self.group_delay_ns < 0:
            raise ConfigurationError("group_delay_ns must be >= 0")
        if self.background_gain < 0:
            raise ConfigurationError("background_gain must be >= 0")
        if self.background_gain > self.peak_gain:
            raise ConfigurationError(
                "background_gain must not exceed peak_gain")


def amplitude_at(r: SpectralResponse, detuning_MHz):
    """Complex field factor at the given detuning(s) in MHz.

    Accepts scalars or arrays. The intensity |H|^2 is the Lorentzian line
    on its background; the phase is odd about center with slope tau_d.
    """
    d = np.asarray(detuning_MHz, dtype=float) - r.center_detuning_MHz
    x = 2.0 * d / r.fwhm_MHz
    line = 1.0 / (1.0 + x * x)
    xp = x / PHASE_ENVELOPE_WIDTH
    envelope = 1.0 / (1.0 + xp * xp)
    mag2 = r.background_gain + (r.peak_gain - r.background_gain) * line
    # MHz * ns = 1e-3 cycles
    phase = 2.0e-3 * np.pi * r.group_delay_ns * d * envelope
    out = np.sqrt(mag2) * np.exp(1j * phase)
    return out if out.ndim else complex(out)


def make_response(cfg: MediumConfig, bm: BandwidthModel, mode: str,
                  pump_mW: float, input_pW: float,
                  bandwidth_law: str = "input",
                  background_gain: float = 0.0,
                  delay_scale: dict[str, float] | None = None) -> SpectralResponse:
    """Assemble the transfer function of one mode at an operating point.

    ``bandwidth_law`` selects which calibrated law sets the linewidth:
    ``"input"`` (injected-power broadening, the default) or ``"pump"``
    (pump power broadening). The peak gain is the medium gain times the
    per-mode attenuation; the group delay is 1/Gamma rescaled by the
    calibrated per-mode factor (see MODE_DELAY_SCALE).
    """
    _check_mode(mode)
    if bandwidth_law == "input":
        fwhm = bandwidth_vs_input(bm, mode, input_pW)
    elif bandwidth_law == "pump":
        fwhm = bandwidth_vs_pump(bm, pump_mW)
    else:
        raise DomainError(
            f"bandwidth_law must be 'input' or 'pump', got {bandwidth_law!r}")
    scale = (delay_scale or MODE_DELAY_SCALE)[mode]
    return SpectralResponse(
        center_detuning_MHz=0.0,
        fwhm_MHz=fwhm,
        peak_gain=intensity_gain(cfg, pump_mW) * cfg.attenuation(mode),
        group_delay_ns=delay_from_bandwidth(fwhm) * scale,
        mode=mode,
        background_gain=background_gain,
    )


def unity_response(mode: str = "probe") -> SpectralResponse:
    """Transparent response: flat unit gain, zero delay.

    Implemented as an infinitely wide line, so propagation through it is
    the identity.
    """
    return SpectralResponse(center_detuning_MHz=0.0, fwhm_MHz=np.inf,
                            peak_gain=1.0, group_delay_ns=0.0, mode=mode)


def kk_consistent_delay(peak_gain: float, fwhm_MHz: float) -> float:
    """Group delay in ns of a causal complex-Lorentzian gain line.

    For H(d) = exp[(ln G0 / 2) / (1 - 2 i d / Gamma)] the phase slope at
    line center gives tau = ln(G0) / (2 pi Gamma). At G0 = 1e7 and
    Gamma = 1.5 MHz this is 1.71 us -- more than twice the 1/Gamma value
    the measurements follow, because pump depletion and re-absorption
    modify the physical dispersion. Kept for comparison only; figure
    reproduction uses 1/Gamma.
    """
    if peak_gain < 1:
        raise DomainError("peak_gain must be >= 1")
    if fwhm_MHz <= 0:
        raise DomainError("fwhm_MHz must be > 0")
    return 1000.0 * np.log(peak_gain) / (2.0 * np.pi * fwhm_MHz)
