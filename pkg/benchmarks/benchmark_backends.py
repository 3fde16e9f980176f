#!/usr/bin/env python3
"""Benchmark the detector Monte Carlo kernels: numba versus pure numpy.

The trace-synthesis loop is the package's only hot path. This script runs
the same ensemble accumulation on both backends, reports wall time and
traces/second, and cross-checks that the accumulated results agree (the
integer RNG streams are shared; only libm rounding may differ).

Usage:
    python benchmarks/benchmark_backends.py [--traces 2000] [--samples 8192]
"""

import argparse
import time

import numpy as np

from fwmsim import backend as bk
from fwmsim.detection import reference_detector_config
from fwmsim.medium import reference_bandwidth_model, reference_medium_config
from fwmsim.pulse import PhotonCalibration, gaussian_pulse, peak_power_from_photons, propagate
from fwmsim.response import make_response

REGIMES = {
    # photon flux high enough that shot noise uses the Gaussian branch
    "gaussian-shot": dict(background_w=1.0e-5, noise_rms_w=6.0e-5, shot=True),
    # weak pedestal pushes every sample through the exact Poisson samplers
    "exact-poisson": dict(background_w=6.0e-9, noise_rms_w=1.0e-7, shot=True),
    # additive electronics noise only
    "gaussian-only": dict(background_w=1.0e-5, noise_rms_w=6.0e-5, shot=False),
}


def ideal_pulse(n_samples: int):
    cfg = reference_medium_config()
    bm = reference_bandwidth_model()
    cal = PhotonCalibration()
    pk_pw = peak_power_from_photons(cal, 1.0)
    dt = 16384.0 / n_samples
    pulse = gaussian_pulse(pk_pw * 1e-12, 587.0, 8000.0, dt, n_samples)
    return propagate(pulse, make_response(cfg, bm, "conjugate", 300.0, pk_pw))


def run_once(backend: str, ideal, m: int, regime: dict):
    det = reference_detector_config(seed=1)
    bk.set_backend(backend)
    args = (np.asarray(ideal.samples), regime["background_w"],
            ideal.dt_ns * 1e-9, det.photon_energy_J, regime["noise_rms_w"],
            regime["shot"], 0.0, 1.0, 1, 0)
    bk.accumulate_traces(*args, 2)  # warm up (JIT compile on numba)
    start = time.perf_counter()
    total, total_sq = bk.accumulate_traces(*args, m)
    elapsed = time.perf_counter() - start
    return elapsed, total, total_sq


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--traces", type=int, default=2000)
    parser.add_argument("--samples", type=int, default=8192)
    args = parser.parse_args()

    backends = bk.available_backends()
    ideal = ideal_pulse(args.samples)
    print(f"ensemble: {args.traces} traces x {args.samples} samples")
    print(f"{'regime':>15} {'backend':>8} {'seconds':>9} {'traces/s':>10} "
          f"{'us/trace':>9}")
    for regime_name, regime in REGIMES.items():
        results = {}
        for backend in backends:
            elapsed, total, total_sq = run_once(backend, ideal,
                                                args.traces, regime)
            results[backend] = (elapsed, total)
            print(f"{regime_name:>15} {backend:>8} {elapsed:9.3f} "
                  f"{args.traces / elapsed:10.0f} "
                  f"{elapsed / args.traces * 1e6:9.1f}")
        if len(results) == 2:
            a = results["numba"][1]
            b = results["numpy"][1]
            rel = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
            speedup = results["numpy"][0] / results["numba"][0]
            print(f"{'':>15} agreement: max rel diff {rel:.2e}, "
                  f"numba speedup x{speedup:.2f}")


if __name__ == "__main__":
    main()
