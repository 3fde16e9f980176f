"""Stochastic detector model: noisy traces, ensemble averaging, SNR.

The detected signal per trace is built sample by sample from the ideal
output pulse: optical shot noise on the photon count expected in one
sample window (exact Poisson below 1e3 photons, Gaussian above), a
constant pedestal from the unseeded conical emission, additive Gaussian
electronics noise, and an optional single-pole low-pass. Every term can
be switched off independently, so its contribution to the averaging
requirement is measurable.

Randomness is fully counter-based (see :mod:`fwmsim.backend`): trace i of
a run is a pure function of (rng_seed, i), so ensembles are reproducible
bit-exactly regardless of execution order, and distinct traces are
statistically independent.

The noise magnitudes of :func:`reference_detector_config` are calibration
choices, not measurements: they are set so a single-photon input at gain
1e7 needs on the order of 1e4-1e5 averages to reach a comfortable SNR,
the regime the averaging workflow is built around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import ConfigurationError, DomainError
from .medium import LIGHT_SPEED_M_S, PLANCK_J_S
from .pulse import Pulse

__all__ = [
    "DetectorConfig",
    "TraceEnsemble",
    "ResolutionReport",
    "detect_once",
    "average_traces",
    "resolve_photon_number",
    "reference_detector_config",
]


@dataclass(frozen=True)
class DetectorConfig:
    """Linear (non-photon-counting) detector and noise model.

    ``noise_rms_W`` is additive Gaussian noise per sample referred to
    optical power; ``background_W`` is the flat conical-emission pedestal
    reaching the detector; ``lowpass_ns`` is the time constant of a
    single-pole low-pass (0 disables it); ``wavelength_nm`` sets the
    photon energy used by the shot-noise conversion.
    """

    responsivity: float = 1.0
    noise_rms_W: float = 0.0
    background_W: float = 0.0
    shot_noise: bool = True
    rng_seed: int = 0
    lowpass_ns: float = 0.0
    wavelength_nm: float = 795.0

    def __post_init__(self) -> None:
        if not self.responsivity > 0:
            raise ConfigurationError("responsivity must be > 0")
        for name in ("noise_rms_W", "background_W", "lowpass_ns"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")
        if not self.wavelength_nm > 0:
            raise ConfigurationError("wavelength_nm must be > 0")
        if not 0 <= self.rng_seed < 2 ** 64:
            raise ConfigurationError("rng_seed must be a 64-bit unsigned value")

    @property
    def photon_energy_J(self) -> float:
        return PLANCK_J_S * LIGHT_SPEED_M_S / (self.wavelength_nm * 1e-9)


PEAK_WINDOW_LEVEL = 0.97


def _peak_window(ideal: np.ndarray) -> np.ndarray:
    """Sample indices of the signal's top region (>= 97% of the ideal peak).

    Reading the detected trace as the mean over this window (instead of
    taking a bare argmax) keeps the peak estimator unbiased when noise
    dominates and shrinks its variance by the window size; the window is
    taken from the noiseless ideal pulse, i.e. at a known position, the
    way a pulse is read off a persisted oscilloscope trace.
    """
    top = ideal.max()
    if top <= 0:
        return np.array([int(np.argmax(ideal))])
    return np.flatnonzero(ideal >= PEAK_WINDOW_LEVEL * top)


@dataclass(frozen=True)
class TraceEnsemble:
    """Averaged detected traces plus per-sample spread and SNR.

    ``per_sample_std`` is the unbiased standard deviation across traces
    (zero for a single trace). ``snr`` is the baseline-subtracted averaged
    trace read over the signal's peak window (see :func:`_peak_window`)
    divided by the standard deviation of the averaged trace's guard-band
    samples.
    """

    n_traces: int
    averaged: Pulse
    per_sample_std: np.ndarray
    snr: float
    rng_seed: int
    peak_index: int
    peak_signal: float

    @property
    def baseline(self) -> float:
        lead, tail = self.averaged.guard_slices()
        y = self.averaged.samples
        return float(np.mean(np.concatenate([y[lead], y[tail]])))

    @property
    def peak_estimate(self) -> float:
        """Averaged trace at the signal peak, above the guard baseline."""
        return float(self.averaged.samples[self.peak_index]) - self.baseline

    @property
    def peak_sigma(self) -> float:
        """Std of the averaged peak reading (single-sample spread / sqrt M)."""
        return float(self.per_sample_std[self.peak_index]) / math.sqrt(self.n_traces)


def _lowpass_alpha(cfg: DetectorConfig, dt_ns: float) -> float:
    if cfg.lowpass_ns <= 0:
        return 0.0
    return 1.0 - math.exp(-dt_ns / cfg.lowpass_ns)


def detect_once(ideal: Pulse, cfg: DetectorConfig, trace_index: int = 0) -> Pulse:
    """One noisy detected trace; deterministic in (rng_seed, trace_index)."""
    if trace_index < 0:
        raise DomainError("trace_index must be >= 0")
    out = backend.synth_trace(
        np.asarray(ideal.samples, dtype=float), cfg.background_W,
        ideal.dt_ns * 1e-9, cfg.photon_energy_J, cfg.noise_rms_W,
        cfg.shot_noise, _lowpass_alpha(cfg, ideal.dt_ns), cfg.responsivity,
        cfg.rng_seed, trace_index)
    return Pulse(samples=out, dt_ns=ideal.dt_ns, t0_ns=ideal.t0_ns,
                 mode=ideal.mode, peak_power_W=float(out.max()), fwhm_ns=None)


def average_traces(ideal: Pulse, cfg: DetectorConfig, m: int,
                   index_start: int = 0) -> TraceEnsemble:
    """Average ``m`` detected traces (indices index_start..index_start+m-1).

    The reduction is index-ordered and therefore bit-reproducible from
    (rng_seed, config, m) alone.
    """
    if m < 1:
        raise DomainError("trace count m must be >= 1")
    total, total_sq = backend.accumulate_traces(
        np.asarray(ideal.samples, dtype=float), cfg.background_W,
        ideal.dt_ns * 1e-9, cfg.photon_energy_J, cfg.noise_rms_W,
        cfg.shot_noise, _lowpass_alpha(cfg, ideal.dt_ns), cfg.responsivity,
        cfg.rng_seed, index_start, m)
    mean = total / m
    if m > 1:
        var = np.clip(total_sq - total * total / m, 0.0, None) / (m - 1)
        std = np.sqrt(var)
    else:
        std = np.zeros_like(mean)
    averaged = Pulse(samples=mean, dt_ns=ideal.dt_ns, t0_ns=ideal.t0_ns,
                     mode=ideal.mode, peak_power_W=float(mean.max()),
                     fwhm_ns=None)
    window = _peak_window(np.asarray(ideal.samples))
    lead, tail = averaged.guard_slices()
    guard = np.concatenate([mean[lead], mean[tail]])
    signal = float(np.mean(mean[window])) - float(np.mean(guard))
    guard_std = float(np.std(guard))
    snr = signal / guard_std if guard_std > 0 else math.inf
    return TraceEnsemble(n_traces=m, averaged=averaged,
                         per_sample_std=std, snr=snr, rng_seed=cfg.rng_seed,
                         peak_index=int(np.argmax(ideal.samples)),
                         peak_signal=signal)


@dataclass(frozen=True)
class ResolutionReport:
    """Photon-number resolvability by averaging.

    Per candidate photon number N the peak estimator is the trace's mean
    over the signal's top window minus its guard-band baseline.
    ``expected_peak`` is its exact expectation N * (window mean of the
    unit-photon ideal pulse), valid because the chain is linear over the
    candidate range; ``peak_mean``/``peak_std`` are the estimator's
    simulated single-trace moments over ``probe_traces`` traces. Averaging
    M traces shrinks the spread by sqrt(M) exactly (traces are
    independent), so ``min_traces_3sigma`` -- the smallest M at which
    every adjacent candidate pair is separated by at least three combined
    standard deviations -- follows from the expected gaps and the
    single-trace spreads.
    """

    candidates: tuple[float, ...]
    expected_peak: tuple[float, ...]
    peak_mean: tuple[float, ...]
    peak_std: tuple[float, ...]
    m_requested: int
    min_traces_3sigma: int
    probe_traces: int
    rng_seed: int

    def peak_std_at(self, m: int) -> tuple[float, ...]:
        return tuple(s / math.sqrt(m) for s in self.peak_std)

    def resolvable_at(self, m: int) -> bool:
        return m >= self.min_traces_3sigma


def resolve_photon_number(cfg: DetectorConfig, ideal_unit: Pulse,
                          candidates: list[float], m: int,
                          probe_traces: int = 256) -> ResolutionReport:
    """Three-sigma resolvability of average photon numbers after averaging.

    ``ideal_unit`` is the ideal detected pulse produced by ONE input
    photon on average; linearity of the amplification chain makes the
    ideal output for N photons exactly N times that pulse, and the
    simulated probe ensembles provide each candidate's single-trace
    estimator spread.
    """
    if m < 1:
        raise DomainError("trace count m must be >= 1")
    if len(candidates) < 2:
        raise DomainError("need at least two candidate photon numbers")
    if sorted(candidates) != list(candidates):
        raise DomainError("candidates must be sorted ascending")
    if probe_traces < 2:
        raise DomainError("probe_traces must be >= 2")
    unit = np.asarray(ideal_unit.samples)
    window = _peak_window(unit)
    unit_peak = float(np.mean(unit[window]))
    if unit_peak <= 0:
        raise DomainError("ideal_unit must carry signal above zero")
    lead, tail = ideal_unit.guard_slices()
    guard_idx = np.concatenate([np.arange(lead.stop),
                                np.arange(tail.start, tail.stop)])
    expected: list[float] = []
    means: list[float] = []
    stds: list[float] = []
    for i, n_ph in enumerate(candidates):
        if n_ph < 0:
            raise DomainError("photon numbers must be >= 0")
        scaled = Pulse(samples=unit * n_ph, dt_ns=ideal_unit.dt_ns,
                       t0_ns=ideal_unit.t0_ns, mode=ideal_unit.mode)
        # disjoint index blocks keep candidate ensembles independent
        estimates = np.empty(probe_traces)
        for t in range(probe_traces):
            trace = detect_once(scaled, cfg, trace_index=i * probe_traces + t)
            y = trace.samples
            estimates[t] = float(np.mean(y[window])) - float(np.mean(y[guard_idx]))
        expected.append(n_ph * unit_peak)
        means.append(float(np.mean(estimates)))
        stds.append(float(np.std(estimates, ddof=1)))
    min_m = 1
    for k in range(len(candidates) - 1):
        gap = expected[k + 1] - expected[k]
        combined = math.hypot(stds[k], stds[k + 1])
        if combined == 0.0 or gap <= 0:
            continue
        # separation after averaging M traces: gap >= 3 * combined / sqrt(M)
        min_m = max(min_m, math.ceil((3.0 * combined / gap) ** 2))
    return ResolutionReport(candidates=tuple(float(c) for c in candidates),
                            expected_peak=tuple(expected),
                            peak_mean=tuple(means), peak_std=tuple(stds),
                            m_requested=m, min_traces_3sigma=min_m,
                            probe_traces=probe_traces, rng_seed=cfg.rng_seed)


def reference_detector_config(seed: int = 0) -> DetectorConfig:
    """Noise calibration for the single-photon averaging regime.

    With the reference amplifier (gain 1e7) a one-photon 587 ns pulse
    peaks near 3 uW at the detector. 60 uW of electronics noise puts the
    single-trace SNR near 0.05, so ~1e4 averages make it visible and 1e5
    comfortable, while the 10 uW conical-emission pedestal keeps every
    sample far above the Poisson-Gaussian threshold.
    """
    return DetectorConfig(responsivity=1.0, noise_rms_W=6.0e-5,
                          background_W=1.0e-5, shot_noise=True,
                          rng_seed=seed, lowpass_ns=0.0)
