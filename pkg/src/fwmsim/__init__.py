"""Simulator and analysis toolkit for a vapor-cell four-wave-mixing
linear optical amplifier: gain and dispersion laws, FFT pulse propagation
through Lorentzian gain lines, a photon-level detector Monte Carlo, and a
nonlinear fitting harness for the characteristic curve shapes.

Unit conventions (package-wide): bandwidths in MHz (ordinary frequency),
delays/times in ns, pump powers in mW, injected probe powers in pW,
instantaneous pulse power in W. The bandwidth-delay relation is
tau_d = 1/Gamma in these units (1000/Gamma_MHz ns).
"""

from .backend import available_backends, get_backend, set_backend
from .detection import (
    DetectorConfig,
    ResolutionReport,
    TraceEnsemble,
    average_traces,
    detect_once,
    reference_detector_config,
    resolve_photon_number,
)
from .fitting import MODELS, FitModel, FitResult, auto_seed, fit, fit_report
from .medium import (
    BandwidthModel,
    MediumConfig,
    bandwidth_vs_input,
    bandwidth_vs_pump,
    delay_from_bandwidth,
    delay_vs_input,
    gain_coefficient,
    intensity_gain,
    pump_photon_budget,
    reference_bandwidth_model,
    reference_medium_config,
    saturated_gain,
)
from .pulse import (
    PhotonCalibration,
    Pulse,
    gaussian_pulse,
    measure_delay,
    measure_fwhm,
    peak_power_from_photons,
    photons_from_peak_power,
    propagate,
    pulse_from_csv,
    pulse_to_csv,
)
from .response import (
    MODE_DELAY_SCALE,
    SpectralResponse,
    amplitude_at,
    kk_consistent_delay,
    make_response,
    unity_response,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "available_backends", "get_backend", "set_backend",
    "MediumConfig", "BandwidthModel", "gain_coefficient", "intensity_gain",
    "bandwidth_vs_input", "bandwidth_vs_pump", "delay_from_bandwidth",
    "delay_vs_input", "pump_photon_budget", "saturated_gain",
    "reference_medium_config", "reference_bandwidth_model",
    "SpectralResponse", "make_response", "amplitude_at", "unity_response",
    "kk_consistent_delay", "MODE_DELAY_SCALE",
    "Pulse", "PhotonCalibration", "gaussian_pulse", "photons_from_peak_power",
    "peak_power_from_photons", "propagate", "measure_delay", "measure_fwhm",
    "pulse_to_csv", "pulse_from_csv",
    "DetectorConfig", "TraceEnsemble", "ResolutionReport", "detect_once",
    "average_traces", "resolve_photon_number", "reference_detector_config",
    "FitModel", "FitResult", "MODELS", "fit", "auto_seed", "fit_report",
]
