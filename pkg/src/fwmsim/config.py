"""Scenario configuration: JSON schema, validation and object assembly.

A run is described by one JSON file. Top-level keys:

=============== ======== ====================================================
key             type     meaning
=============== ======== ====================================================
scenario        string   one of the names in :data:`SCENARIO_NAMES`
seed            integer  64-bit RNG seed (default 0; CLI --seed overrides)
output_dir      string   output directory (default "fwmsim-out"; --out wins)
medium          object   MediumConfig fields (all optional)
bandwidth       object   BandwidthModel fields (all optional)
detector        object   DetectorConfig fields except rng_seed (optional)
calibration     object   PhotonCalibration fields (optional)
response        object   background_gain, probe_delay_scale,
                         conjugate_delay_scale (optional)
grid            object   dt_ns, n_samples, center_ns (optional)
sweep           object   start, stop, points, spacing ("linear"|"log");
                         required by the sweep scenarios
photons         number   input photon level (propagate, snr-averaging)
noise_fraction  number   synthetic measurement scatter applied before the
                         sweep fits (delay-vs-photon; default 0.05)
m_values        array    trace counts for snr-averaging
m_traces        integer  trace count for resolve-n
candidates      array    photon numbers for resolve-n (ascending)
probe_traces    integer  probe ensemble size for resolve-n (default 256)
=============== ======== ====================================================

Validation reports the offending key and the expected type; nothing is
written before the whole file validates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path
from typing import Any

from .detection import DetectorConfig, reference_detector_config
from .errors import SchemaError
from .medium import BandwidthModel, MediumConfig
from .pulse import PhotonCalibration
from .response import MODE_DELAY_SCALE

__all__ = ["SCENARIO_NAMES", "RunConfig", "load_config", "parse_config"]

SCENARIO_NAMES = (
    "delay-vs-photon",
    "delay-vs-pump",
    "gain-sweep",
    "linearity",
    "propagate",
    "resolve-n",
    "snr-averaging",
    "spectrum",
)

_SWEEP_SCENARIOS = {"gain-sweep", "spectrum", "delay-vs-photon",
                    "delay-vs-pump", "linearity"}


@dataclass(frozen=True)
class GridConfig:
    dt_ns: float = 2.0
    n_samples: int = 8192
    center_ns: float = 8000.0

    def __post_init__(self) -> None:
        if not self.dt_ns > 0:
            raise SchemaError("grid.dt_ns must be > 0")
        n = self.n_samples
        if n < 64 or n & (n - 1):
            raise SchemaError("grid.n_samples must be a power of two >= 64")


@dataclass(frozen=True)
class SweepConfig:
    start: float
    stop: float
    points: int
    spacing: str = "linear"

    def __post_init__(self) -> None:
        if self.points < 2:
            raise SchemaError("sweep.points must be >= 2")
        if self.spacing not in ("linear", "log"):
            raise SchemaError("sweep.spacing must be 'linear' or 'log'")
        if self.spacing == "log" and (self.start <= 0 or self.stop <= 0):
            raise SchemaError("sweep bounds must be > 0 for log spacing")
        if not self.stop > self.start:
            raise SchemaError("sweep.stop must exceed sweep.start")


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    seed: int
    output_dir: str
    medium: MediumConfig
    bandwidth: BandwidthModel
    detector: DetectorConfig
    calibration: PhotonCalibration
    grid: GridConfig
    sweep: SweepConfig | None
    background_gain: float
    delay_scale: dict[str, float]
    photons: float
    noise_fraction: float
    m_values: tuple[int, ...]
    m_traces: int
    candidates: tuple[float, ...]
    probe_traces: int
    config_sha256: str = ""
    raw: dict = field(default_factory=dict)


def _expect(block: str, key: str, value: Any, kind: str) -> Any:
    full = f"{block}.{key}" if block else key
    if kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"config key '{full}': expected a number, "
                              f"got {type(value).__name__}")
        return float(value)
    if kind == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"config key '{full}': expected an integer, "
                              f"got {type(value).__name__}")
        return value
    if kind == "string":
        if not isinstance(value, str):
            raise SchemaError(f"config key '{full}': expected a string, "
                              f"got {type(value).__name__}")
        return value
    if kind == "boolean":
        if not isinstance(value, bool):
            raise SchemaError(f"config key '{full}': expected a boolean, "
                              f"got {type(value).__name__}")
        return value
    if kind == "object":
        if not isinstance(value, dict):
            raise SchemaError(f"config key '{full}': expected an object, "
                              f"got {type(value).__name__}")
        return value
    if kind == "array":
        if not isinstance(value, list):
            raise SchemaError(f"config key '{full}': expected an array, "
                              f"got {type(value).__name__}")
        return value
    raise AssertionError(kind)


_FIELD_KINDS = {bool: "boolean", int: "integer", float: "number", str: "string"}


def _build_dataclass(cls, block_name: str, data: dict, **extra):
    """Construct a config dataclass from a JSON object with key checking."""
    allowed = {f.name: f.type for f in dc_fields(cls)}
    values = dict(extra)
    for key, value in data.items():
        if key not in allowed or key in extra:
            raise SchemaError(
                f"config key '{block_name}.{key}': unknown "
                f"(expected one of: {', '.join(sorted(set(allowed) - set(extra)))})")
        ann = str(allowed[key])
        if "bool" in ann:
            values[key] = _expect(block_name, key, value, "boolean")
        elif "int" in ann:
            values[key] = _expect(block_name, key, value, "integer")
        elif "str" in ann:
            values[key] = _expect(block_name, key, value, "string")
        else:
            if value is None and "None" in ann:
                values[key] = None
            else:
                values[key] = _expect(block_name, key, value, "number")
    return cls(**values)


_TOP_LEVEL = {
    "scenario": "string",
    "seed": "integer",
    "output_dir": "string",
    "medium": "object",
    "bandwidth": "object",
    "detector": "object",
    "calibration": "object",
    "response": "object",
    "grid": "object",
    "sweep": "object",
    "photons": "number",
    "noise_fraction": "number",
    "m_values": "array",
    "m_traces": "integer",
    "candidates": "array",
    "probe_traces": "integer",
}


def parse_config(data: dict, config_sha256: str = "") -> RunConfig:
    """Validate a decoded JSON object and assemble the run configuration."""
    if not isinstance(data, dict):
        raise SchemaError("config root: expected a JSON object")
    for key in data:
        if key not in _TOP_LEVEL:
            raise SchemaError(
                f"config key '{key}': unknown "
                f"(expected one of: {', '.join(sorted(_TOP_LEVEL))})")
    for key, kind in _TOP_LEVEL.items():
        if key in data:
            _expect("", key, data[key], kind)

    if "scenario" not in data:
        raise SchemaError("config key 'scenario': required (a string)")
    scenario = data["scenario"]
    if scenario not in SCENARIO_NAMES:
        raise SchemaError(
            f"config key 'scenario': must be one of "
            f"{', '.join(SCENARIO_NAMES)}; got {scenario!r}")

    seed = data.get("seed", 0)
    if not 0 <= seed < 2 ** 64:
        raise SchemaError("config key 'seed': must fit an unsigned 64-bit value")

    medium = _build_dataclass(MediumConfig, "medium", data.get("medium", {}))
    bandwidth = _build_dataclass(BandwidthModel, "bandwidth",
                                 data.get("bandwidth", {}))
    det_block = data.get("detector")
    if det_block is None:
        detector = reference_detector_config(seed=seed)
    else:
        if "rng_seed" in det_block:
            raise SchemaError(
                "config key 'detector.rng_seed': set the top-level 'seed' instead")
        detector = _build_dataclass(DetectorConfig, "detector", det_block,
                                    rng_seed=seed)
    calibration = _build_dataclass(PhotonCalibration, "calibration",
                                   data.get("calibration", {}))
    grid = _build_dataclass(GridConfig, "grid", data.get("grid", {}))

    resp = _expect("", "response", data.get("response", {}), "object")
    for key in resp:
        if key not in ("background_gain", "probe_delay_scale",
                       "conjugate_delay_scale"):
            raise SchemaError(
                f"config key 'response.{key}': unknown (expected one of: "
                "background_gain, conjugate_delay_scale, probe_delay_scale)")
    background_gain = _expect("response", "background_gain",
                              resp.get("background_gain", 0.0), "number")
    delay_scale = {
        "probe": _expect("response", "probe_delay_scale",
                         resp.get("probe_delay_scale",
                                  MODE_DELAY_SCALE["probe"]), "number"),
        "conjugate": _expect("response", "conjugate_delay_scale",
                             resp.get("conjugate_delay_scale",
                                      MODE_DELAY_SCALE["conjugate"]), "number"),
    }

    sweep = None
    if "sweep" in data:
        sweep_data = dict(data["sweep"])
        for key in sweep_data:
            if key not in ("start", "stop", "points", "spacing"):
                raise SchemaError(
                    f"config key 'sweep.{key}': unknown "
                    "(expected one of: points, spacing, start, stop)")
        for key in ("start", "stop"):
            if key not in sweep_data:
                raise SchemaError(f"config key 'sweep.{key}': required (a number)")
            sweep_data[key] = _expect("sweep", key, sweep_data[key], "number")
        if "points" not in sweep_data:
            raise SchemaError("config key 'sweep.points': required (an integer)")
        sweep_data["points"] = _expect("sweep", "points",
                                       sweep_data["points"], "integer")
        if "spacing" in sweep_data:
            sweep_data["spacing"] = _expect("sweep", "spacing",
                                            sweep_data["spacing"], "string")
        sweep = SweepConfig(**sweep_data)
    elif scenario in _SWEEP_SCENARIOS:
        raise SchemaError(
            f"config key 'sweep': required by scenario {scenario!r} "
            "(object with start, stop, points[, spacing])")

    m_values = tuple(_expect("m_values", str(i), v, "integer")
                     for i, v in enumerate(data.get("m_values", [100, 1000, 10000])))
    if any(v < 1 for v in m_values) or not m_values:
        raise SchemaError("config key 'm_values': needs positive integers")
    candidates = tuple(_expect("candidates", str(i), v, "number")
                       for i, v in enumerate(
                           data.get("candidates", list(range(1, 11)))))
    m_traces = data.get("m_traces", 100000)
    if m_traces < 1:
        raise SchemaError("config key 'm_traces': must be >= 1")
    probe_traces = data.get("probe_traces", 256)
    if probe_traces < 2:
        raise SchemaError("config key 'probe_traces': must be >= 2")
    noise_fraction = data.get("noise_fraction", 0.05)
    if not 0 <= noise_fraction < 1:
        raise SchemaError("config key 'noise_fraction': must lie in [0, 1)")
    photons = data.get("photons", 0.7 if scenario == "propagate" else 1.0)
    if photons < 0:
        raise SchemaError("config key 'photons': must be >= 0")

    return RunConfig(
        scenario=scenario, seed=seed,
        output_dir=data.get("output_dir", "fwmsim-out"),
        medium=medium, bandwidth=bandwidth, detector=detector,
        calibration=calibration, grid=grid, sweep=sweep,
        background_gain=background_gain, delay_scale=delay_scale,
        photons=photons, noise_fraction=noise_fraction,
        m_values=m_values, m_traces=m_traces, candidates=candidates,
        probe_traces=probe_traces, config_sha256=config_sha256, raw=data,
    )


def load_config(path: str | Path) -> RunConfig:
    """Read, hash and validate a JSON config file."""
    import hashlib

    raw = Path(path).read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return parse_config(data, config_sha256=digest)
