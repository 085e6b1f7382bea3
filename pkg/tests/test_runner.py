"""
Tests for run orchestration and the experiment registry.
"""
import os
import shutil
import tempfile

import pytest

from core.errors import ConfigError
from experiments import ExperimentRegistry, get_experiment, register_experiments
from experiments.catalog import DoubleSlitExperiment, OracleCompareExperiment
from utils.config_parser import parse_config
from utils.runner import MANIFEST_NAME, apply_cli_overrides, read_manifest, run_experiment

DOUBLE_SLIT = """
particle.p = 6.283185307179586
geometry.d = 5
geometry.L = 100
screen.bins = 200
seed.master = 11
"""

SWEEP = """
experiment = sweep
particle.p = 6.283185307179586
geometry.d = 5
geometry.L = 1
screen.bins = 100
screen.x_min = -10
screen.x_max = 10
sweep.distances = 0.5, 1, 2, 4, 8
"""


def strip_created(path: str):
    with open(path, "r", encoding="utf-8") as f:
        return [line for line in f.read().splitlines() if not line.startswith("# created:")]


class TestExperimentRegistry:
    """Test suite for the experiment registry."""

    def test_names(self):
        """Every driver is registered under its snake_case name."""
        assert register_experiments().names() == [
            "double_slit", "sweep", "aharonov_bohm", "epr", "barrier", "oracle_compare"
        ]

    def test_derived_name(self):
        """Class names map to experiment names."""
        assert OracleCompareExperiment().get_experiment_name() == "oracle_compare"
        assert DoubleSlitExperiment().describe() == "Double slit screen density with optional intrusion"

    def test_unknown_experiment(self):
        """Unknown names are configuration errors."""
        with pytest.raises(ConfigError) as excinfo:
            get_experiment("triple_slit")
        assert excinfo.value.kind == "unknown_key"
        assert excinfo.value.key == "experiment"

    def test_empty_registry(self):
        """A fresh registry knows nothing."""
        assert ExperimentRegistry().names() == []


class TestRunExperiment:
    """Test suite for run_experiment."""

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()
        self.out_dir = os.path.join(self.temp_dir, "out")

    def teardown_method(self):
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_double_slit_outputs(self):
        """One profile, one plot script and the manifest."""
        manifest = run_experiment("double_slit", parse_config(DOUBLE_SLIT), self.out_dir)
        assert manifest.files == ["double_slit.csv", "plot_double_slit.py", MANIFEST_NAME]
        assert sorted(os.listdir(self.out_dir)) == sorted(manifest.files)
        assert manifest.master_seed == 11
        assert 0.0 <= manifest.extras["visibility"] <= 1.0

    def test_manifest_on_disk(self):
        """The manifest file echoes the config and lists the files."""
        cfg = parse_config(DOUBLE_SLIT)
        manifest = run_experiment("double_slit", cfg, self.out_dir)
        stored = read_manifest(self.out_dir)
        assert stored["files"] == manifest.files
        assert parse_config(stored["config_echo"]) == cfg
        assert stored["tool_version"] == manifest.tool_version

    def test_sweep_writes_one_profile_per_distance(self):
        """Five distances give five profile CSVs."""
        manifest = run_experiment("sweep", parse_config(SWEEP), self.out_dir)
        csvs = [name for name in manifest.files if name.endswith(".csv")]
        assert csvs == [f"sweep_{i:02d}.csv" for i in range(5)]
        assert len(manifest.extras["adjacent_l1"]) == 4
        assert "# distance: 0.5" in strip_created(os.path.join(self.out_dir, "sweep_00.csv"))

    def test_failure_leaves_no_outputs(self):
        """A driver failure raises and leaves the output directory empty."""
        cfg = parse_config(SWEEP.replace("0.5, 1, 2, 4, 8", "8, 4"))
        with pytest.raises(ConfigError):
            run_experiment("sweep", cfg, self.out_dir)
        assert os.listdir(self.out_dir) == []

    def test_reruns_identical(self):
        """Two runs with the same seed differ only in their timestamps."""
        cfg = parse_config(DOUBLE_SLIT)
        again = os.path.join(self.temp_dir, "again")
        run_experiment("double_slit", cfg, self.out_dir)
        run_experiment("double_slit", cfg, again)
        for name in ("double_slit.csv", "plot_double_slit.py"):
            assert strip_created(os.path.join(self.out_dir, name)) == strip_created(os.path.join(again, name))

    def test_experiment_name_wins(self):
        """The requested experiment replaces the one named in the config."""
        manifest = run_experiment("aharonov_bohm", parse_config(DOUBLE_SLIT), self.out_dir)
        assert manifest.experiment == "aharonov_bohm"
        assert "experiment = aharonov_bohm" in manifest.config_echo

    def test_epr_outputs(self):
        """The EPR driver writes a single table and no plot script."""
        cfg = parse_config(DOUBLE_SLIT + "epr.S_rho = 1\nepr.S_rho_prime = -1\nepr.delta_S = 0.5\n")
        manifest = run_experiment("epr", cfg, self.out_dir)
        assert manifest.files == ["epr.csv", MANIFEST_NAME]


class TestCliOverrides:
    """Test suite for apply_cli_overrides."""

    def test_seed_and_estimator(self):
        """Command-line values replace the document's."""
        cfg = apply_cli_overrides(parse_config(DOUBLE_SLIT), seed=99, estimator="monte_carlo")
        assert cfg.seeds.master_seed == 99
        assert cfg.estimator.value == "monte_carlo"

    def test_no_overrides(self):
        """Without overrides the config is returned unchanged."""
        cfg = parse_config(DOUBLE_SLIT)
        assert apply_cli_overrides(cfg) == cfg
