"""Named experiment scenarios producing deterministic CSV data files.

Each scenario consumes a validated :class:`~fwmsim.config.RunConfig` and
returns ``(files, summary)``: a mapping of output file names to their
full text, and a JSON-serializable summary that goes into the run
manifest. Scenario code never touches the filesystem; the CLI writes all
outputs atomically after a scenario finishes, so a failed run leaves no
partial files.

Floats are rendered with 17 significant digits, which round-trips IEEE
doubles exactly; identical config and seed therefore reproduce the output
bytes exactly (for a fixed compute backend).
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import medium as md
from . import response as rs
from .config import RunConfig
from .detection import average_traces, resolve_photon_number
from .fitting import fit
from .pulse import (
    gaussian_pulse,
    measure_delay,
    measure_fwhm,
    peak_power_from_photons,
    photons_from_peak_power,
    propagate,
)

__all__ = ["SCENARIOS", "run_scenario", "scenario_table"]

_G = "%.17g"


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return _G % float(value)


def _csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _sweep_values(cfg: RunConfig) -> np.ndarray:
    sw = cfg.sweep
    if sw.spacing == "log":
        return np.geomspace(sw.start, sw.stop, sw.points)
    return np.linspace(sw.start, sw.stop, sw.points)


def _input_pulse(cfg: RunConfig, peak_power_pw: float, mode=None) -> Pulse:
    return gaussian_pulse(peak_power_pw * 1e-12, cfg.calibration.pulse_fwhm_ns,
                          cfg.grid.center_ns, cfg.grid.dt_ns,
                          cfg.grid.n_samples, mode=mode)


def _response(cfg: RunConfig, mode: str, input_pw: float,
              bandwidth_law: str = "input") -> rs.SpectralResponse:
    return rs.make_response(cfg.medium, cfg.bandwidth, mode,
                            cfg.medium.pump_power_mW, input_pw,
                            bandwidth_law=bandwidth_law,
                            background_gain=cfg.background_gain,
                            delay_scale=cfg.delay_scale)


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------

def _run_gain_sweep(cfg: RunConfig):
    """Amplifier gain curve: g and G over a pump-power sweep."""
    rows = []
    for pump in _sweep_values(cfg):
        g = md.gain_coefficient(cfg.medium, float(pump))
        big_g = md.intensity_gain(cfg.medium, float(pump))
        rows.append([pump, g, big_g])
    files = {"gain_sweep.csv": _csv(
        ["pump_mW", "gain_coefficient_per_m", "intensity_gain"], rows)}
    summary = {
        "unity_gain_pump_mW": cfg.medium.gain_coeff_unity_pump_mW,
        "gain_at_operating_pump": md.intensity_gain(
            cfg.medium, cfg.medium.pump_power_mW),
    }
    return files, summary


def _run_spectrum(cfg: RunConfig):
    """Gain-line profiles of both modes with Lorentzian fits."""
    input_pw = peak_power_from_photons(cfg.calibration, cfg.photons)
    detunings = _sweep_values(cfg)
    files = {}
    fit_rows = []
    summary = {}
    for mode in md.MODES:
        r = _response(cfg, mode, input_pw)
        amp = rs.amplitude_at(r, detunings)
        mag2 = np.abs(amp) ** 2
        rows = [[d, 10.0 * math.log10(m2), ph]
                for d, m2, ph in zip(detunings, mag2, np.angle(amp))]
        files[f"spectrum_{mode}.csv"] = _csv(
            ["detuning_MHz", "gain_dB", "phase_rad"], rows)
        res = fit("lorentzian", detunings, mag2)
        kk_ns = rs.kk_consistent_delay(r.peak_gain, r.fwhm_MHz)
        fit_rows.append([mode, res["amplitude"], res["center"], res["fwhm"],
                         res.sigma_of("fwhm"), res["offset"], r.peak_gain,
                         r.fwhm_MHz, r.group_delay_ns, kk_ns, res.converged])
        summary[f"{mode}_fitted_fwhm_MHz"] = res["fwhm"]
        summary[f"{mode}_group_delay_ns"] = r.group_delay_ns
        summary[f"{mode}_kk_delay_ns"] = kk_ns
    files["spectrum_fits.csv"] = _csv(
        ["mode", "amplitude", "center_MHz", "fwhm_MHz", "fwhm_sigma_MHz",
         "offset", "model_peak_gain", "model_fwhm_MHz",
         "group_delay_ns", "kk_delay_ns", "converged"], fit_rows)
    return files, summary


def _run_propagate(cfg: RunConfig):
    """Slow-light pulse propagation: reference plus both delayed modes."""
    input_pw = peak_power_from_photons(cfg.calibration, cfg.photons)
    reference = _input_pulse(cfg, input_pw)
    t = reference.times_ns
    files = {"propagate_reference.csv": _csv(
        ["t_ns", "power_W"], [[a, b] for a, b in zip(t, reference.samples)])}
    rows = []
    summary = {"input_photons": cfg.photons, "input_peak_pW": input_pw}
    for mode in md.MODES:
        r = _response(cfg, mode, input_pw)
        out = propagate(reference, r)
        files[f"propagate_{mode}.csv"] = _csv(
            ["t_ns", "power_W"], [[a, b] for a, b in zip(t, out.samples)])
        d_peak = measure_delay(reference, out, "peak")
        d_centroid = measure_delay(reference, out, "centroid")
        d_xcorr = measure_delay(reference, out, "xcorr")
        width = measure_fwhm(out)
        kk_ns = rs.kk_consistent_delay(r.peak_gain, r.fwhm_MHz)
        inv_gamma = md.delay_from_bandwidth(r.fwhm_MHz)
        rows.append([mode, r.fwhm_MHz, r.peak_gain, r.group_delay_ns,
                     d_peak, d_centroid, d_xcorr,
                     d_peak / cfg.calibration.pulse_fwhm_ns, width,
                     inv_gamma, kk_ns])
        summary[f"{mode}_delay_ns"] = d_peak
        summary[f"{mode}_fractional_delay"] = d_peak / cfg.calibration.pulse_fwhm_ns
        summary[f"{mode}_inv_bandwidth_delay_ns"] = inv_gamma
        summary[f"{mode}_kk_delay_ns"] = kk_ns
    summary["probe_minus_conjugate_delay_ns"] = (
        summary["probe_delay_ns"] - summary["conjugate_delay_ns"])
    files["propagate_summary.csv"] = _csv(
        ["mode", "bandwidth_MHz", "peak_gain", "group_delay_ns",
         "delay_peak_ns", "delay_centroid_ns", "delay_xcorr_ns",
         "fractional_delay", "output_fwhm_ns",
         "inv_bandwidth_delay_ns", "kk_delay_ns"], rows)
    return files, summary


def _run_delay_vs_photon(cfg: RunConfig):
    """Bandwidth and pulse delay over an injected-power sweep, with fits.

    Delays are measured end to end (FFT propagation, peak method); a
    seeded fractional scatter (``noise_fraction``) emulates measurement
    spread before the square-root-law fits, whose generating constants
    are recorded alongside.
    """
    powers = _sweep_values(cfg)
    rng = np.random.default_rng(cfg.seed)
    files = {}
    rows = []
    fit_rows = []
    summary = {}
    for mode in md.MODES:
        band = np.array([md.bandwidth_vs_input(cfg.bandwidth, mode, float(p))
                         for p in powers])
        measured = np.empty(powers.size)
        model = np.empty(powers.size)
        for i, p in enumerate(powers):
            r = _response(cfg, mode, float(p))
            pulse_in = _input_pulse(cfg, float(p))
            out = propagate(pulse_in, r)
            measured[i] = measure_delay(pulse_in, out, "peak")
            model[i] = r.group_delay_ns
        noisy = measured * (1.0 + cfg.noise_fraction
                            * rng.standard_normal(powers.size))
        band_noisy = band * (1.0 + cfg.noise_fraction
                             * rng.standard_normal(powers.size))
        photons = np.array([photons_from_peak_power(cfg.calibration, float(p))
                            for p in powers])
        for i, p in enumerate(powers):
            rows.append([mode, p, photons[i], band[i], band_noisy[i],
                         model[i], measured[i], noisy[i]])
        # fits in 1/us ~ MHz units so (s, z) align with the bandwidth law;
        # fractional scatter means sigma_i ~ noise * y_i, hence the weights
        kappa = cfg.delay_scale[mode]
        s_gen = cfg.bandwidth.slope(mode) / kappa
        z_gen = cfg.bandwidth.offset_MHz / kappa
        if cfg.noise_fraction > 0:
            w_band = 1.0 / (cfg.noise_fraction * band_noisy) ** 2
            w_delay = 1.0 / (cfg.noise_fraction * noisy / 1000.0) ** 2
        else:
            w_band = w_delay = None
        band_fit = fit("sqrt_law", powers, band_noisy, weights=w_band)
        delay_fit = fit("inv_sqrt_law", powers, noisy / 1000.0,
                        weights=w_delay)
        fit_rows.append([mode, "sqrt_law", band_fit["s"], band_fit.sigma_of("s"),
                         band_fit["z"], band_fit.sigma_of("z"),
                         cfg.bandwidth.slope(mode), cfg.bandwidth.offset_MHz,
                         band_fit.converged, band_fit.iterations])
        fit_rows.append([mode, "inv_sqrt_law", delay_fit["s"],
                         delay_fit.sigma_of("s"), delay_fit["z"],
                         delay_fit.sigma_of("z"), s_gen, z_gen,
                         delay_fit.converged, delay_fit.iterations])
        summary[f"{mode}_delay_s_fit"] = delay_fit["s"]
        summary[f"{mode}_delay_s_sigma"] = delay_fit.sigma_of("s")
        summary[f"{mode}_delay_s_generating"] = s_gen
        summary[f"{mode}_bandwidth_s_fit"] = band_fit["s"]
    files["delay_vs_photon.csv"] = _csv(
        ["mode", "input_pW", "photons", "bandwidth_MHz", "bandwidth_noisy_MHz",
         "delay_model_ns", "delay_measured_ns", "delay_noisy_ns"], rows)
    files["delay_vs_photon_fits.csv"] = _csv(
        ["mode", "model", "s_fit", "s_sigma", "z_fit", "z_sigma",
         "s_generating", "z_generating", "converged", "iterations"], fit_rows)
    return files, summary


def _run_delay_vs_pump(cfg: RunConfig):
    """Bandwidth (power broadening) and delay over a pump-power sweep."""
    pumps = _sweep_values(cfg)
    input_pw = peak_power_from_photons(cfg.calibration, cfg.photons)
    pulse_in = _input_pulse(cfg, input_pw)
    rows = []
    summary = {}
    for mode in md.MODES:
        delays = []
        for pump in pumps:
            r = rs.make_response(cfg.medium, cfg.bandwidth, mode, float(pump),
                                 input_pw, bandwidth_law="pump",
                                 background_gain=cfg.background_gain,
                                 delay_scale=cfg.delay_scale)
            out = propagate(pulse_in, r)
            measured = measure_delay(pulse_in, out, "peak")
            delays.append(measured)
            rows.append([mode, pump, r.fwhm_MHz, r.group_delay_ns, measured])
        summary[f"{mode}_delay_range_ns"] = [min(delays), max(delays)]
    summary["pump_broadening_MHz_per_mW"] = (
        cfg.bandwidth.pump_broadening_MHz_per_mW)
    files = {"delay_vs_pump.csv": _csv(
        ["mode", "pump_mW", "bandwidth_MHz", "delay_model_ns",
         "delay_measured_ns"], rows)}
    return files, summary


def _run_linearity(cfg: RunConfig):
    """Output peak versus input photon number across the dynamic range.

    The transfer function is held at the low-light operating point
    (bandwidth growth with input is characterized by delay-vs-photon);
    what varies is the input amplitude and the pump-budget gain
    compression, so the curve isolates the linear-amplifier property and
    its saturation knee.
    """
    photon_values = _sweep_values(cfg)
    mode = "conjugate"
    unit_pw = peak_power_from_photons(cfg.calibration, 1.0)
    r = _response(cfg, mode, unit_pw)
    base_in = _input_pulse(cfg, unit_pw)
    base_out = propagate(base_in, r)
    unit_peak = float(base_out.samples.max())
    budget = md.pump_photon_budget(cfg.medium, cfg.calibration.pulse_fwhm_ns,
                                   cfg.calibration.wavelength_nm)
    g0 = r.peak_gain
    rows = []
    for n in photon_values:
        n = float(n)
        g_eff = md.saturated_gain(g0, n, budget)
        out_peak = unit_peak * n * (g_eff / g0)
        linear_ref = unit_peak * n
        rows.append([n, unit_pw * 1e-12 * n, out_peak, linear_ref,
                     1.0 - out_peak / linear_ref if n > 0 else 0.0])
    knee = budget / g0 * (0.05 / 0.95)
    files = {"linearity.csv": _csv(
        ["photons", "input_peak_W", "output_peak_W", "linear_reference_W",
         "departure_fraction"], rows)}
    summary = {"pump_photon_budget": budget, "peak_gain": g0,
               "knee_photons_5pct": knee}
    return files, summary


def _run_snr_averaging(cfg: RunConfig):
    """Ensemble averaging: SNR of the detected pulse versus trace count."""
    input_pw = peak_power_from_photons(cfg.calibration, cfg.photons)
    r = _response(cfg, "conjugate", input_pw)
    ideal = propagate(_input_pulse(cfg, input_pw), r)
    rows = []
    summary = {"input_photons": cfg.photons}
    for m in cfg.m_values:
        ens = average_traces(ideal, cfg.detector, int(m))
        rows.append([cfg.photons, int(m), ens.peak_signal, ens.peak_sigma,
                     ens.snr, cfg.detector.rng_seed])
        summary[f"snr_M{int(m)}"] = ens.snr
    files = {"snr_averaging.csv": _csv(
        ["N_photons", "M", "peak_mean", "peak_std", "snr", "seed"], rows)}
    return files, summary


def _run_resolve_n(cfg: RunConfig):
    """Photon-number resolvability by averaging with a linear detector."""
    unit_pw = peak_power_from_photons(cfg.calibration, 1.0)
    r = _response(cfg, "conjugate", unit_pw)
    ideal_unit = propagate(_input_pulse(cfg, unit_pw), r)
    report = resolve_photon_number(cfg.detector, ideal_unit,
                                   list(cfg.candidates), cfg.m_traces,
                                   probe_traces=cfg.probe_traces)
    m = report.m_requested
    rows = []
    for i, n in enumerate(report.candidates):
        std_at_m = report.peak_std[i] / math.sqrt(m)
        snr = report.expected_peak[i] / std_at_m if std_at_m > 0 else math.inf
        rows.append([n, m, report.peak_mean[i], report.peak_std[i], snr,
                     report.rng_seed])
    pair_rows = []
    for i in range(len(report.candidates) - 1):
        gap = report.expected_peak[i + 1] - report.expected_peak[i]
        combined = math.hypot(report.peak_std[i], report.peak_std[i + 1])
        need = math.ceil((3.0 * combined / gap) ** 2) if gap > 0 else -1
        pair_rows.append([report.candidates[i], report.candidates[i + 1],
                          gap, combined, max(1, need)])
    files = {
        "resolve_n.csv": _csv(
            ["N_photons", "M", "peak_mean", "peak_std", "snr", "seed"], rows),
        "resolve_n_pairs.csv": _csv(
            ["N_low", "N_high", "expected_gap", "combined_single_trace_std",
             "min_traces_3sigma"], pair_rows),
    }
    summary = {"min_traces_3sigma": report.min_traces_3sigma,
               "resolvable_at_m": report.resolvable_at(m),
               "probe_traces": report.probe_traces}
    return files, summary


SCENARIOS: dict[str, tuple[str, Callable]] = {
    "delay-vs-photon": (
        "sweep injected power, measure pulse delays end to end, fit the "
        "bandwidth and delay square-root laws (delay scaling with input "
        "photon number)", _run_delay_vs_photon),
    "delay-vs-pump": (
        "sweep pump power, tabulate power-broadened bandwidth and the "
        "resulting pulse delay (pump tuning of slow light)",
        _run_delay_vs_pump),
    "gain-sweep": (
        "tabulate gain coefficient and exponential intensity gain over a "
        "pump-power sweep", _run_gain_sweep),
    "linearity": (
        "output peak versus input photon number across the dynamic range, "
        "showing the saturation knee from the pump photon budget",
        _run_linearity),
    "propagate": (
        "propagate a pulse through both output modes at one operating "
        "point and measure the group-velocity delays (slow light traces)",
        _run_propagate),
    "resolve-n": (
        "photon-number resolvability: averaged-peak statistics per "
        "candidate photon number and the trace count needed for "
        "three-sigma separation", _run_resolve_n),
    "snr-averaging": (
        "detected-pulse SNR versus number of averaged traces for a "
        "single-photon-level input", _run_snr_averaging),
    "spectrum": (
        "dump both modes' complex gain profiles over a detuning sweep and "
        "fit the Lorentzian lines", _run_spectrum),
}


def run_scenario(cfg: RunConfig):
    """Execute the configured scenario; returns (files, summary)."""
    _, runner = SCENARIOS[cfg.scenario]
    return runner(cfg)


_SCENARIO_COLUMNS = {
    "delay-vs-photon": (
        "delay_vs_photon.csv: mode, input_pW, photons, bandwidth_MHz, "
        "bandwidth_noisy_MHz, delay_model_ns, delay_measured_ns, "
        "delay_noisy_ns; delay_vs_photon_fits.csv: mode, model, s_fit, "
        "s_sigma, z_fit, z_sigma, s_generating, z_generating, converged, "
        "iterations"),
    "delay-vs-pump": (
        "delay_vs_pump.csv: mode, pump_mW, bandwidth_MHz, delay_model_ns, "
        "delay_measured_ns"),
    "gain-sweep": (
        "gain_sweep.csv: pump_mW, gain_coefficient_per_m, intensity_gain"),
    "linearity": (
        "linearity.csv: photons, input_peak_W, output_peak_W, "
        "linear_reference_W, departure_fraction"),
    "propagate": (
        "propagate_{reference,probe,conjugate}.csv: t_ns, power_W; "
        "propagate_summary.csv: mode, bandwidth_MHz, peak_gain, "
        "group_delay_ns, delay_peak_ns, delay_centroid_ns, delay_xcorr_ns, "
        "fractional_delay, output_fwhm_ns, inv_bandwidth_delay_ns, "
        "kk_delay_ns"),
    "resolve-n": (
        "resolve_n.csv: N_photons, M, peak_mean, peak_std, snr, seed; "
        "resolve_n_pairs.csv: N_low, N_high, expected_gap, "
        "combined_single_trace_std, min_traces_3sigma"),
    "snr-averaging": (
        "snr_averaging.csv: N_photons, M, peak_mean, peak_std, snr, seed"),
    "spectrum": (
        "spectrum_{probe,conjugate}.csv: detuning_MHz, gain_dB, phase_rad; "
        "spectrum_fits.csv: mode, amplitude, center_MHz, fwhm_MHz, "
        "fwhm_sigma_MHz, offset, model_peak_gain, model_fwhm_MHz, "
        "group_delay_ns, kk_delay_ns, converged"),
}


def scenario_table() -> str:
    """Stable (alphabetical) listing of scenarios with their outputs."""
    required = {name: "sweep" for name in
                ("gain-sweep", "spectrum", "delay-vs-photon",
                 "delay-vs-pump", "linearity")}
    required["snr-averaging"] = "m_values"
    required["resolve-n"] = "candidates, m_traces"
    required["propagate"] = "none beyond defaults"
    lines = []
    for name in sorted(SCENARIOS):
        desc, _ = SCENARIOS[name]
        lines.append(f"{name}")
        lines.append(f"    {desc}")
        lines.append(f"    required config: {required[name]}")
        lines.append(f"    columns: {_SCENARIO_COLUMNS[name]}")
    return "\n".join(lines)
