"""
Result file emitters for gauge_sim runs.
CSV profiles, tunnelling and EPR tables, and generated plot scripts.
"""

import logging
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.models import DensityProfile, TunnelingReport

logger = logging.getLogger(__name__)

PROFILE_COLUMNS = ["bin_center", "gauge_density", "oracle_density"]
METADATA_KEYS = ("seed", "config_hash", "estimator")


def format_number(value: float) -> str:
    """Positional decimal with 12 significant digits, trailing zeros trimmed."""
    return np.format_float_positional(float(value), precision=12, unique=False, fractional=False, trim="-")


def _metadata_lines(metadata: Dict[str, Any], created: Optional[str] = None) -> List[str]:
    lines = [f"# {key}: {metadata[key]}" for key in METADATA_KEYS if key in metadata]
    lines.extend(f"# {key}: {value}" for key, value in metadata.items() if key not in METADATA_KEYS)
    stamp = created or datetime.now(timezone.utc).isoformat(timespec="seconds")
    lines.append(f"# created: {stamp}")
    return lines


def _write_table(frame: pd.DataFrame, destination: str, metadata: Dict[str, Any]) -> str:
    with open(destination, "w", encoding="utf-8", newline="") as handle:
        for line in _metadata_lines(metadata):
            handle.write(line + "\n")
        frame.to_csv(handle, index=False, lineterminator="\n", na_rep="")
    logger.debug(f"Wrote {len(frame)} rows to {destination}")
    return destination


def write_profile(profile: DensityProfile, destination: str, metadata: Optional[Dict[str, Any]] = None) -> str:
    """
    Write a density profile as CSV.

    Args:
        profile: Profile to write
        destination: Output file path
        metadata: Values for the leading `#` lines (seed, config_hash, estimator, ...)

    Returns:
        The destination path

    Raises:
        OSError: If the destination cannot be written
    """
    oracle = profile.oracle_density
    frame = pd.DataFrame({
        "bin_center": [format_number(v) for v in profile.bin_centers],
        "gauge_density": [format_number(v) for v in profile.gauge_density],
        "oracle_density": [format_number(v) for v in oracle] if oracle is not None else [""] * len(profile.bin_centers),
    }, columns=PROFILE_COLUMNS)
    header = dict(metadata or {})
    header.setdefault("overflow", profile.overflow)
    return _write_table(frame, destination, header)


def write_tunneling_report(report: TunnelingReport, destination: str, metadata: Optional[Dict[str, Any]] = None) -> str:
    """CSV of emergent speeds, one row per transmitted path, with the counts in the header lines."""
    frame = pd.DataFrame({
        "path_index": [str(i) for i in range(len(report.emergent_speeds))],
        "emergent_speed": [format_number(v) for v in report.emergent_speeds],
    }, columns=["path_index", "emergent_speed"])
    header = dict(metadata or {})
    header.update({
        "n_attempts": report.n_attempts,
        "n_transmitted": report.n_transmitted,
        "transmitted_fraction": format_number(report.transmitted_fraction),
    })
    return _write_table(frame, destination, header)


def write_epr_result(result: Dict[str, Any], destination: str, metadata: Optional[Dict[str, Any]] = None) -> str:
    """Single-row CSV of an EPR phase-algebra evaluation."""
    row = {
        key: format_number(value) if isinstance(value, float) else str(value).lower()
        for key, value in result.items()
    }
    frame = pd.DataFrame([row], columns=list(result.keys()))
    return _write_table(frame, destination, dict(metadata or {}))


def read_profile(source: str) -> pd.DataFrame:
    """Read a profile CSV back, skipping the metadata lines."""
    return pd.read_csv(source, comment="#")


def write_plot_script(
    destination: str,
    profile_files: Sequence[str] = (),
    speed_files: Sequence[str] = (),
    title: str = "gauge_sim",
) -> str:
    """
    Write a standalone matplotlib script that renders the given CSV files.

    File names are taken relative to the script's own directory.
    """
    lines = [
        '"""',
        f"Plot script for {title}",
        '"""',
        "",
        "import os",
        "",
        "import matplotlib.pyplot as plt",
        "import pandas as pd",
        "",
        "HERE = os.path.dirname(os.path.abspath(__file__))",
        f"PROFILES = {list(profile_files)!r}",
        f"SPEEDS = {list(speed_files)!r}",
        "",
        "",
        "def main():",
        "    for name in PROFILES:",
        "        frame = pd.read_csv(os.path.join(HERE, name), comment='#')",
        "        fig, ax = plt.subplots()",
        "        ax.plot(frame['bin_center'], frame['gauge_density'], label='gauge')",
        "        if frame['oracle_density'].notna().any():",
        "            ax.plot(frame['bin_center'], frame['oracle_density'], label='oracle', linestyle='--')",
        "        ax.set_xlabel('screen coordinate')",
        "        ax.set_ylabel('density')",
        f"        ax.set_title({title!r} + ': ' + name)",
        "        ax.legend()",
        "        fig.savefig(os.path.join(HERE, os.path.splitext(name)[0] + '.png'))",
        "    for name in SPEEDS:",
        "        frame = pd.read_csv(os.path.join(HERE, name), comment='#')",
        "        fig, ax = plt.subplots()",
        "        ax.hist(frame['emergent_speed'], bins=30)",
        "        ax.set_xlabel('emergent speed')",
        "        ax.set_ylabel('paths')",
        "        fig.savefig(os.path.join(HERE, os.path.splitext(name)[0] + '.png'))",
        "    plt.show()",
        "",
        "",
        "if __name__ == '__main__':",
        "    main()",
        "",
    ]
    with open(destination, "w", encoding="utf-8", newline="") as handle:
        handle.write("\n".join(lines))
    return destination
