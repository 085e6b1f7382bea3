"""
Tests for the CSV emitters and plot script generator.
"""
import os
import tempfile

import numpy as np
import pytest

from core.models import DensityProfile, TunnelingReport
from utils.output import (
    PROFILE_COLUMNS, format_number, read_profile, write_epr_result, write_plot_script, write_profile,
    write_tunneling_report
)

METADATA = {"seed": 7, "config_hash": "abc123", "estimator": "analytic"}


def read_lines(path: str):
    with open(path, "r", encoding="utf-8") as f:
        return f.read().split("\n")


class TestFormatNumber:
    """Test suite for format_number."""

    def test_twelve_significant_digits(self):
        """Values keep 12 significant digits in positional notation."""
        assert format_number(1.0 / 3.0) == "0.333333333333"
        assert format_number(123456.789) == "123456.789"

    def test_trailing_zeros_trimmed(self):
        """Whole numbers lose their decimal point."""
        assert format_number(2.0) == "2"
        assert format_number(0.5) == "0.5"


class TestWriteProfile:
    """Test suite for write_profile and read_profile."""

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()
        self.path = os.path.join(self.temp_dir, "profile.csv")

    def teardown_method(self):
        for name in os.listdir(self.temp_dir):
            os.remove(os.path.join(self.temp_dir, name))
        os.rmdir(self.temp_dir)

    def test_two_bins_without_oracle(self):
        """Two bins give the header and two rows with an empty oracle field."""
        profile = DensityProfile(bin_centers=[-0.5, 0.5], gauge_density=[0.25, 0.75])
        write_profile(profile, self.path, METADATA)
        lines = read_lines(self.path)
        data = [line for line in lines if line and not line.startswith("#")]
        assert data == [",".join(PROFILE_COLUMNS), "-0.5,0.25,", "0.5,0.75,"]

    def test_metadata_lines(self):
        """Seed, config hash and estimator lead the file, followed by the timestamp."""
        profile = DensityProfile(bin_centers=[0.0, 1.0], gauge_density=[1.0, 0.0], overflow=3)
        write_profile(profile, self.path, METADATA)
        lines = read_lines(self.path)
        assert lines[0] == "# seed: 7"
        assert lines[1] == "# config_hash: abc123"
        assert lines[2] == "# estimator: analytic"
        assert "# overflow: 3" in lines
        assert lines[lines.index("bin_center,gauge_density,oracle_density") - 1].startswith("# created: ")

    def test_oracle_column(self):
        """An oracle density fills the third column."""
        profile = DensityProfile(bin_centers=[0.0, 1.0], gauge_density=[0.4, 0.6], oracle_density=[0.5, 0.5])
        write_profile(profile, self.path, METADATA)
        frame = read_profile(self.path)
        assert list(frame.columns) == PROFILE_COLUMNS
        np.testing.assert_allclose(frame["oracle_density"], [0.5, 0.5])

    def test_deterministic_apart_from_timestamp(self):
        """Writing the same profile twice gives the same bytes except the created line."""
        profile = DensityProfile(bin_centers=np.linspace(-1, 1, 5), gauge_density=np.arange(5) / 10.0)
        other = os.path.join(self.temp_dir, "again.csv")
        write_profile(profile, self.path, METADATA)
        write_profile(profile, other, METADATA)
        strip = lambda lines: [line for line in lines if not line.startswith("# created:")]
        assert strip(read_lines(self.path)) == strip(read_lines(other))

    def test_read_back(self):
        """Values survive to 12 significant digits."""
        centers = np.linspace(-2.0, 2.0, 9)
        density = np.exp(-centers ** 2)
        write_profile(DensityProfile(bin_centers=centers, gauge_density=density), self.path, METADATA)
        frame = read_profile(self.path)
        np.testing.assert_allclose(frame["gauge_density"], density, rtol=1e-11)
        assert frame["oracle_density"].isna().all()


class TestReportEmitters:
    """Test suite for the tunnelling, EPR and plot emitters."""

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        for name in os.listdir(self.temp_dir):
            os.remove(os.path.join(self.temp_dir, name))
        os.rmdir(self.temp_dir)

    def test_tunneling_report(self):
        """One row per transmitted path with the counts in the header."""
        path = os.path.join(self.temp_dir, "speeds.csv")
        write_tunneling_report(TunnelingReport(10, 2, (0.5, 0.25)), path, METADATA)
        lines = read_lines(path)
        assert "# n_attempts: 10" in lines
        assert "# n_transmitted: 2" in lines
        assert "# transmitted_fraction: 0.2" in lines
        frame = read_profile(path)
        assert list(frame.columns) == ["path_index", "emergent_speed"]
        assert list(frame["emergent_speed"]) == [0.5, 0.25]

    def test_epr_result(self):
        """Booleans are written lowercase, floats with 12 digits."""
        path = os.path.join(self.temp_dir, "epr.csv")
        write_epr_result({"S_rho": 1.5, "undisturbed_physical": True}, path, METADATA)
        data = [line for line in read_lines(path) if line and not line.startswith("#")]
        assert data == ["S_rho,undisturbed_physical", "1.5,true"]

    def test_plot_script(self):
        """The generated script names its inputs and compiles."""
        path = os.path.join(self.temp_dir, "plot_run.py")
        write_plot_script(path, ["double_slit.csv"], ["barrier_speeds.csv"], title="run")
        with open(path, "r", encoding="utf-8") as f:
            source = f.read()
        assert "import matplotlib.pyplot as plt" in source
        assert "'double_slit.csv'" in source
        assert "'barrier_speeds.csv'" in source
        compile(source, path, "exec")

    @pytest.mark.parametrize("count", [0, 3])
    def test_empty_and_short_speed_lists(self, count):
        """Reports with no transmissions still write a header row."""
        path = os.path.join(self.temp_dir, "speeds.csv")
        write_tunneling_report(TunnelingReport(5, count, (0.1,) * count), path, METADATA)
        assert len(read_profile(path)) == count
