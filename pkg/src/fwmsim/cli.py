"""Command-line scenario runner.

Usage::

    fwmsim run CONFIG.json [--seed N] [--out DIR]
    fwmsim list

Exit codes: 0 success, 2 configuration/schema error, 3 numeric or domain
error during a scenario. Outputs are written atomically (temp file plus
rename) after the scenario completes, alongside a ``run_manifest.json``
recording the config hash, seed, package version and compute backend;
the same config and seed reproduce every output byte for byte on a given
backend.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__, backend
from .config import RunConfig, load_config
from .errors import (
    ConfigurationError,
    DomainError,
    FittingError,
    MeasurementError,
    PropagationError,
    SchemaError,
)
from .scenarios import run_scenario, scenario_table

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".",
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _run(cfg: RunConfig, out_dir: Path) -> int:
    files, summary = run_scenario(cfg)
    manifest = {
        "artifact_version": __version__,
        "backend": backend.get_backend(),
        "config_sha256": cfg.config_sha256,
        "outputs": sorted(files),
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "summary": summary,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in sorted(files):
        _write_atomic(out_dir / name, files[name])
    _write_atomic(out_dir / "run_manifest.json",
                  json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"{cfg.scenario}: wrote {len(files) + 1} files to {out_dir}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fwmsim",
        description="four-wave-mixing amplifier simulation scenarios")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario config")
    run_p.add_argument("config", help="path to the JSON scenario config")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the config's RNG seed")
    run_p.add_argument("--out", default=None,
                       help="override the config's output directory")

    sub.add_parser("list", help="list scenarios and their config needs")

    args = parser.parse_args(argv)

    if args.command == "list":
        print(scenario_table())
        return EXIT_OK

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            raw = dict(cfg.raw)
            raw["seed"] = args.seed
            from .config import parse_config
            cfg = parse_config(raw, config_sha256=cfg.config_sha256)
    except FileNotFoundError:
        print(f"fwmsim: config file not found: {args.config}", file=sys.stderr)
        return EXIT_CONFIG
    except (SchemaError, ConfigurationError) as exc:
        print(f"fwmsim: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out) if args.out is not None else Path(cfg.output_dir)
    try:
        return _run(cfg, out_dir)
    except (DomainError, PropagationError, MeasurementError,
            FittingError, ConfigurationError) as exc:
        print(f"fwmsim: {cfg.scenario} failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
