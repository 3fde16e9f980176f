"""CLI surface: scenario running, config validation, reproducibility."""

import json
from pathlib import Path

import numpy as np
import pytest

from fwmsim.cli import main
from fwmsim.config import SCENARIO_NAMES, load_config, parse_config
from fwmsim.errors import SchemaError
from fwmsim.scenarios import SCENARIOS


def write_config(tmp_path: Path, name: str, data: dict) -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=1))
    return path


TINY_GRID = {"dt_ns": 8.0, "n_samples": 2048, "center_ns": 8000.0}

TINY_CONFIGS = {
    "gain-sweep": {
        "scenario": "gain-sweep",
        "sweep": {"start": 0.0, "stop": 300.0, "points": 13},
    },
    "spectrum": {
        "scenario": "spectrum", "photons": 0.7,
        "sweep": {"start": -10.0, "stop": 10.0, "points": 201},
    },
    "propagate": {"scenario": "propagate", "photons": 0.7},
    "delay-vs-photon": {
        "scenario": "delay-vs-photon", "seed": 26, "grid": TINY_GRID,
        "sweep": {"start": 0.5, "stop": 400.0, "points": 9, "spacing": "log"},
    },
    "delay-vs-pump": {
        "scenario": "delay-vs-pump", "photons": 3.8, "grid": TINY_GRID,
        "sweep": {"start": 60.0, "stop": 300.0, "points": 7},
    },
    "linearity": {
        "scenario": "linearity",
        "sweep": {"start": 1.0, "stop": 10000.0, "points": 17,
                  "spacing": "log"},
    },
    "snr-averaging": {
        "scenario": "snr-averaging", "grid": TINY_GRID,
        "m_values": [10, 100],
    },
    "resolve-n": {
        "scenario": "resolve-n", "grid": TINY_GRID,
        "candidates": [1, 2, 3], "m_traces": 1000, "probe_traces": 16,
    },
}


class TestListCommand:
    def test_lists_all_scenarios_alphabetically(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        names = [ln for ln in out.splitlines()
                 if ln and not ln.startswith(" ")]
        assert names == sorted(SCENARIO_NAMES)
        assert len(names) == 8

    def test_descriptions_present(self, capsys):
        main(["list"])
        out = capsys.readouterr().out
        for name in SCENARIO_NAMES:
            assert name in out
        assert "required config" in out
        assert "columns:" in out
        assert "detuning_MHz,gain_dB,phase_rad".replace(",", ", ") in out


class TestRunCommand:
    @pytest.mark.parametrize("name", sorted(TINY_CONFIGS))
    def test_each_scenario_runs(self, tmp_path, name):
        cfg = write_config(tmp_path, "c.json", TINY_CONFIGS[name])
        out_dir = tmp_path / "out"
        assert main(["run", str(cfg), "--out", str(out_dir)]) == 0
        manifest = json.loads((out_dir / "run_manifest.json").read_text())
        assert manifest["scenario"] == name
        assert manifest["config_sha256"]
        for produced in manifest["outputs"]:
            assert (out_dir / produced).is_file()

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", TINY_CONFIGS["delay-vs-photon"])
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", str(cfg), "--out", str(a)]) == 0
        assert main(["run", str(cfg), "--out", str(b)]) == 0
        files_a = sorted(p.name for p in a.iterdir())
        assert files_a == sorted(p.name for p in b.iterdir())
        for name in files_a:
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_seed_override_changes_noise(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", TINY_CONFIGS["snr-averaging"])
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", str(cfg), "--out", str(a), "--seed", "1"]) == 0
        assert main(["run", str(cfg), "--out", str(b), "--seed", "2"]) == 0
        assert ((a / "snr_averaging.csv").read_bytes()
                != (b / "snr_averaging.csv").read_bytes())
        assert json.loads((a / "run_manifest.json").read_text())["seed"] == 1

    def test_missing_file_exit_2(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "nope.json")]) == 2

    def test_invalid_json_exit_2_no_output(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{scenario: broken")
        out_dir = tmp_path / "out"
        assert main(["run", str(bad), "--out", str(out_dir)]) == 2
        assert not out_dir.exists()

    def test_unknown_key_named_in_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "c.json", {
            "scenario": "gain-sweep",
            "sweep": {"start": 0, "stop": 10, "points": 3},
            "pump_profile": "flat"})
        assert main(["run", str(cfg)]) == 2
        err = capsys.readouterr().err
        assert "pump_profile" in err

    def test_wrong_type_named_in_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "c.json", {
            "scenario": "gain-sweep",
            "sweep": {"start": 0, "stop": 10, "points": "many"}})
        assert main(["run", str(cfg)]) == 2
        err = capsys.readouterr().err
        assert "sweep.points" in err and "integer" in err

    def test_missing_required_block(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "c.json", {"scenario": "spectrum"})
        assert main(["run", str(cfg)]) == 2
        assert "sweep" in capsys.readouterr().err

    def test_numeric_failure_exit_3_no_partial_outputs(self, tmp_path):
        # a delay too long for the grid triggers a propagation error
        data = dict(TINY_CONFIGS["propagate"])
        data["grid"] = {"dt_ns": 2.0, "n_samples": 1024, "center_ns": 1000.0}
        cfg = write_config(tmp_path, "c.json", data)
        out_dir = tmp_path / "out"
        assert main(["run", str(cfg), "--out", str(out_dir)]) == 3
        assert not out_dir.exists() or not list(out_dir.iterdir())


class TestOutputFormats:
    def test_spectrum_columns(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", TINY_CONFIGS["spectrum"])
        out_dir = tmp_path / "out"
        main(["run", str(cfg), "--out", str(out_dir)])
        for mode in ("probe", "conjugate"):
            header = (out_dir / f"spectrum_{mode}.csv").read_text().splitlines()[0]
            assert header == "detuning_MHz,gain_dB,phase_rad"

    def test_ensemble_summary_columns(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", TINY_CONFIGS["snr-averaging"])
        out_dir = tmp_path / "out"
        main(["run", str(cfg), "--out", str(out_dir)])
        header = (out_dir / "snr_averaging.csv").read_text().splitlines()[0]
        assert header == "N_photons,M,peak_mean,peak_std,snr,seed"

    def test_seventeen_digit_floats_roundtrip(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", TINY_CONFIGS["gain-sweep"])
        out_dir = tmp_path / "out"
        main(["run", str(cfg), "--out", str(out_dir)])
        rows = (out_dir / "gain_sweep.csv").read_text().splitlines()[1:]
        from fwmsim.medium import intensity_gain, reference_medium_config
        ref = reference_medium_config()
        for row in rows:
            pump, _, gain = row.split(",")
            assert float(gain) == intensity_gain(ref, float(pump))


class TestConfigParsing:
    def test_defaults_cover_reference_calibration(self):
        cfg = parse_config({"scenario": "propagate"})
        assert cfg.medium.gain_coeff_unity_pump_mW == 130.0
        assert cfg.calibration.pulse_fwhm_ns == 587.0
        assert cfg.detector.rng_seed == 0

    def test_seed_flows_into_detector(self):
        cfg = parse_config({"scenario": "propagate", "seed": 99})
        assert cfg.detector.rng_seed == 99

    def test_detector_rng_seed_key_rejected(self):
        with pytest.raises(SchemaError):
            parse_config({"scenario": "propagate",
                          "detector": {"rng_seed": 3}})

    def test_nested_unknown_key(self):
        with pytest.raises(SchemaError) as err:
            parse_config({"scenario": "propagate",
                          "medium": {"cell_length_mm": 75}})
        assert "medium.cell_length_mm" in str(err.value)

    def test_scenario_names_frozen(self):
        assert sorted(SCENARIO_NAMES) == sorted(SCENARIOS)
        assert len(SCENARIO_NAMES) == 8

    def test_shipped_configs_valid(self):
        root = Path(__file__).resolve().parent.parent / "configs"
        shipped = sorted(root.glob("*.json"))
        assert len(shipped) == 8
        seen = set()
        for path in shipped:
            cfg = load_config(path)
            seen.add(cfg.scenario)
        assert seen == set(SCENARIO_NAMES)
