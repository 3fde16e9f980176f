"""Scenario output content: the numbers inside the CSVs."""

import csv
import io
import json
from pathlib import Path

import pytest

from fwmsim.config import load_config, parse_config
from fwmsim.scenarios import run_scenario

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def rows_of(files: dict, name: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(files[name])))


@pytest.fixture(scope="module")
def delay_vs_photon():
    cfg = load_config(CONFIG_DIR / "delay_vs_photon.json")
    return run_scenario(cfg)


class TestDelayVsPhotonScenario:
    def test_fits_match_generating_within_two_sigma(self, delay_vs_photon):
        files, _ = delay_vs_photon
        for row in rows_of(files, "delay_vs_photon_fits.csv"):
            assert row["converged"] == "true"
            for par in ("s", "z"):
                fit_v = float(row[f"{par}_fit"])
                gen_v = float(row[f"{par}_generating"])
                sigma = float(row[f"{par}_sigma"])
                assert abs(fit_v - gen_v) <= 2.0 * sigma, (row["mode"],
                                                           row["model"], par)

    def test_measured_delay_monotone_decreasing(self, delay_vs_photon):
        files, _ = delay_vs_photon
        per_mode = {}
        for row in rows_of(files, "delay_vs_photon.csv"):
            per_mode.setdefault(row["mode"], []).append(
                (float(row["input_pW"]), float(row["delay_measured_ns"])))
        for mode, series in per_mode.items():
            series.sort()
            delays = [d for _, d in series]
            assert all(b < a for a, b in zip(delays, delays[1:])), mode

    def test_photon_axis_increases_with_power(self, delay_vs_photon):
        files, _ = delay_vs_photon
        rows = [r for r in rows_of(files, "delay_vs_photon.csv")
                if r["mode"] == "probe"]
        photons = [float(r["photons"]) for r in rows]
        powers = [float(r["input_pW"]) for r in rows]
        assert photons == sorted(photons)
        # 400 pW of 587 ns pulse at 795 nm is ~940 photons
        assert photons[-1] / powers[-1] == pytest.approx(939.7 / 400.0,
                                                         rel=1e-3)


class TestSpectrumScenario:
    def test_fitted_linewidths(self):
        cfg = load_config(CONFIG_DIR / "spectrum.json")
        files, summary = run_scenario(cfg)
        assert summary["probe_fitted_fwhm_MHz"] == pytest.approx(1.48, rel=0.01)
        assert summary["conjugate_fitted_fwhm_MHz"] == pytest.approx(1.53, rel=0.01)
        fits = {r["mode"]: r for r in rows_of(files, "spectrum_fits.csv")}
        for mode in ("probe", "conjugate"):
            assert float(fits[mode]["fwhm_MHz"]) < 5.75

    def test_profile_peaks_at_center(self):
        cfg = load_config(CONFIG_DIR / "spectrum.json")
        files, _ = run_scenario(cfg)
        rows = rows_of(files, "spectrum_conjugate.csv")
        best = max(rows, key=lambda r: float(r["gain_dB"]))
        assert abs(float(best["detuning_MHz"])) < 0.1
        assert float(best["gain_dB"]) == pytest.approx(70.0, abs=0.1)  # 1e7


class TestPropagateScenario:
    def test_reference_delays(self):
        cfg = load_config(CONFIG_DIR / "propagate.json")
        _, summary = run_scenario(cfg)
        assert summary["probe_delay_ns"] == pytest.approx(672.0, abs=1e-6)
        assert summary["conjugate_delay_ns"] == pytest.approx(592.0, abs=1e-6)
        assert summary["probe_minus_conjugate_delay_ns"] == pytest.approx(
            80.0, abs=1e-6)

    def test_cross_check_methods_agree(self):
        cfg = load_config(CONFIG_DIR / "propagate.json")
        files, _ = run_scenario(cfg)
        for row in rows_of(files, "propagate_summary.csv"):
            peak = float(row["delay_peak_ns"])
            xcorr = float(row["delay_xcorr_ns"])
            assert xcorr == pytest.approx(peak, rel=0.05)

    def test_output_broadened(self):
        cfg = load_config(CONFIG_DIR / "propagate.json")
        files, _ = run_scenario(cfg)
        for row in rows_of(files, "propagate_summary.csv"):
            assert float(row["output_fwhm_ns"]) >= 587.0


class TestLinearityScenario:
    def test_departure_grows_past_knee(self):
        cfg = load_config(CONFIG_DIR / "linearity.json")
        files, summary = run_scenario(cfg)
        knee = summary["knee_photons_5pct"]
        for row in rows_of(files, "linearity.csv"):
            n = float(row["photons"])
            dep = float(row["departure_fraction"])
            if n < knee / 2.0:
                assert dep < 0.05
            if n > 2.0 * knee:
                assert dep > 0.05


class TestResolveScenario:
    def test_noiseless_immediate_resolution(self):
        cfg = parse_config({
            "scenario": "resolve-n",
            "grid": {"dt_ns": 8.0, "n_samples": 2048, "center_ns": 8000.0},
            "detector": {"noise_rms_W": 0.0, "background_W": 0.0,
                         "shot_noise": False},
            "candidates": [1, 2, 3], "m_traces": 10, "probe_traces": 4,
        })
        _, summary = run_scenario(cfg)
        assert summary["min_traces_3sigma"] == 1
        assert summary["resolvable_at_m"] is True

    def test_reference_noise_needs_hundreds_of_traces(self):
        cfg = parse_config({
            "scenario": "resolve-n",
            "grid": {"dt_ns": 8.0, "n_samples": 2048, "center_ns": 8000.0},
            "candidates": [1, 2, 3, 4, 5], "m_traces": 100000,
            "probe_traces": 64,
        })
        files, summary = run_scenario(cfg)
        assert 50 <= summary["min_traces_3sigma"] <= 5000
        assert summary["resolvable_at_m"] is True
        pairs = rows_of(files, "resolve_n_pairs.csv")
        assert len(pairs) == 4


class TestManifestDeterminism:
    def test_same_seed_same_bytes(self):
        base = {"scenario": "snr-averaging", "seed": 3,
                "grid": {"dt_ns": 8.0, "n_samples": 2048, "center_ns": 8000.0},
                "m_values": [10, 50]}
        a_files, a_summary = run_scenario(parse_config(base))
        b_files, b_summary = run_scenario(parse_config(base))
        assert a_files == b_files
        assert json.dumps(a_summary, sort_keys=True) == json.dumps(
            b_summary, sort_keys=True)
