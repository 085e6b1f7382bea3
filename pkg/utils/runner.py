"""
Run orchestration for gauge_sim.
Executes an experiment driver and publishes its outputs with a manifest.
"""

import dataclasses
import json
import logging
import os
import shutil
import tempfile
import time
from typing import Any, Dict, List, Optional

import numpy as np

from core.models import Estimator, ExperimentConfig, RunManifest, SeedSpec
from experiments.base import ExperimentResult
from experiments.catalog import get_experiment
from utils.config_parser import config_hash, serialize_config
from utils.output import write_epr_result, write_plot_script, write_profile, write_tunneling_report

logger = logging.getLogger(__name__)

TOOL_VERSION = "1.0.0"
MANIFEST_NAME = "manifest.json"


def apply_cli_overrides(cfg: ExperimentConfig, seed: Optional[int] = None, estimator: Optional[str] = None) -> ExperimentConfig:
    """Replace the master seed and estimator when given on the command line."""
    if seed is not None:
        cfg = dataclasses.replace(cfg, seeds=SeedSpec(master_seed=seed, stream_count=cfg.seeds.stream_count))
    if estimator is not None:
        cfg = dataclasses.replace(cfg, estimator=Estimator(estimator))
    return cfg


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def _write_outputs(result: ExperimentResult, name: str, cfg: ExperimentConfig, staging: str) -> List[str]:
    header = {
        "seed": cfg.seeds.master_seed,
        "config_hash": config_hash(cfg),
        "estimator": cfg.estimator.value,
        "experiment": name,
    }
    files: List[str] = []
    profile_files: List[str] = []
    for label, profile in result.profiles:
        file_name = f"{label}.csv"
        metadata = dict(header)
        if "distance" in profile.metadata:
            metadata["distance"] = profile.metadata["distance"]
        write_profile(profile, os.path.join(staging, file_name), metadata)
        profile_files.append(file_name)

    speed_files: List[str] = []
    if result.tunneling is not None:
        file_name = f"{name}_speeds.csv"
        write_tunneling_report(result.tunneling, os.path.join(staging, file_name), header)
        speed_files.append(file_name)

    epr_files: List[str] = []
    if result.epr is not None:
        file_name = f"{name}.csv"
        write_epr_result(result.epr, os.path.join(staging, file_name), header)
        epr_files.append(file_name)

    files.extend(profile_files + speed_files + epr_files)
    if profile_files or speed_files:
        script = f"plot_{name}.py"
        write_plot_script(os.path.join(staging, script), profile_files, speed_files, title=name)
        files.append(script)
    return files


def run_experiment(name: str, cfg: ExperimentConfig, out_dir: str) -> RunManifest:
    """
    Execute an experiment and write its CSVs, plot script and manifest.

    Outputs are staged in a hidden directory inside out_dir and moved into
    place only after every file was written, so a failed run leaves no
    partial outputs behind.

    Args:
        name: Experiment name from the registry
        cfg: Parsed configuration
        out_dir: Output directory, created if missing

    Returns:
        RunManifest listing every emitted file

    Raises:
        ConfigError: If the experiment is unknown or the config does not suit it
        GaugeSimError: On numeric failures inside the driver
    """
    experiment = get_experiment(name)
    if cfg.experiment != name:
        logger.info(f"Config names experiment '{cfg.experiment}', running '{name}'")
        cfg = dataclasses.replace(cfg, experiment=name)

    os.makedirs(out_dir, exist_ok=True)
    staging = tempfile.mkdtemp(prefix=".staging-", dir=out_dir)
    started = time.perf_counter()
    try:
        logger.info(f"Running {name} (seed {cfg.seeds.master_seed}, estimator {cfg.estimator.value})")
        result = experiment.run(cfg)
        # Stage outputs
        files = _write_outputs(result, name, cfg, staging)

        # Write manifest
        manifest = RunManifest(
            experiment=name,
            config_echo=serialize_config(cfg),
            master_seed=cfg.seeds.master_seed,
            tool_version=TOOL_VERSION,
            wall_time=time.perf_counter() - started,
            files=files + [MANIFEST_NAME],
            extras=result.extras,
        )
        with open(os.path.join(staging, MANIFEST_NAME), "w", encoding="utf-8") as handle:
            json.dump(manifest.to_dict(), handle, indent=2, default=_json_default)
            handle.write("\n")

        # Move into place
        for file_name in manifest.files:
            os.replace(os.path.join(staging, file_name), os.path.join(out_dir, file_name))
    finally:
        shutil.rmtree(staging, ignore_errors=True)

    logger.info(f"Run {name} finished in {manifest.wall_time:.2f}s, {len(manifest.files)} files in {out_dir}")
    return manifest


def read_manifest(out_dir: str) -> Dict[str, Any]:
    with open(os.path.join(out_dir, MANIFEST_NAME), "r", encoding="utf-8") as handle:
        return json.load(handle)
