"""
Tests for the barrier tunnelling scan.
"""
import dataclasses

import numpy as np
import pytest

from core.errors import ConfigError
from core.gauge import phase_residuals
from core.models import (
    TWO_PI, ActionMode, ExperimentConfig, ParticleParams, PotentialKind, PotentialSpec, Projection,
    SamplerConfig, ScreenSpec, SeedSpec
)
from core.spacetime import segment_actions
from experiments.barrier import barrier_scan, classically_forbidden, closing_durations, crossing_scales


def barrier_config(V: float = 1.0, n_paths: int = 2000, **overrides) -> ExperimentConfig:
    """m = 1 with kinetic energy 0.5 against a unit-width barrier on [0, 1]."""
    settings = dict(
        particle=ParticleParams.from_kinetic_energy(1.0, 0.5),
        slit_separation=1.0,
        screen=ScreenSpec(n_bins=10, distance=1.0),
        pot=PotentialSpec(kind=PotentialKind.BARRIER, V=V, x_lo=0.0, x_hi=1.0),
        sampler=SamplerConfig(n_paths=n_paths),
        seeds=SeedSpec(master_seed=2024, stream_count=4),
        barrier_start=-5.0,
    )
    settings.update(overrides)
    return ExperimentConfig(**settings)


class TestBarrierScan:
    """Test suite for barrier_scan."""

    def test_forbidden_barrier_has_physical_crossings(self):
        """Below the barrier height some paths still cross."""
        report = barrier_scan(barrier_config())
        assert report.n_attempts == 2000
        assert report.n_transmitted >= 1

    def test_crossings_at_canonical_sample_size(self):
        """At 1e5 attempts physical crossings exist and stay a minority."""
        report = barrier_scan(barrier_config(n_paths=100000))
        assert report.n_transmitted >= 1
        assert report.transmitted_fraction < 0.5

    def test_most_paths_reflect(self):
        """Crossings without a physical interior segment reflect; the rest transmit."""
        fraction = barrier_scan(barrier_config()).transmitted_fraction
        assert 0.0 < fraction < 0.5

    def test_speeds_below_light(self):
        """Every emergent speed is at most 1."""
        report = barrier_scan(barrier_config())
        assert all(0.0 < v <= 1.0 for v in report.emergent_speeds)
        assert len(report.emergent_speeds) == report.n_transmitted

    def test_emergent_speeds_spread(self):
        """Transmitted particles leave with a wide range of speeds."""
        speeds = np.array(barrier_scan(barrier_config()).emergent_speeds)
        assert np.max(speeds) - np.min(speeds) > 0.5

    def test_free_limit(self):
        """With V = 0 nearly every attempt propagates."""
        report = barrier_scan(barrier_config(V=0.0, n_paths=200))
        assert report.transmitted_fraction >= 0.8

    def test_reproducible(self):
        """Same seeds, same report."""
        cfg = barrier_config(n_paths=500)
        assert barrier_scan(cfg) == barrier_scan(cfg)

    def test_worker_pool_matches_serial(self):
        """Streams evaluated in a process pool give the serial report."""
        cfg = barrier_config(n_paths=400)
        pooled = dataclasses.replace(cfg, sampler=dataclasses.replace(cfg.sampler, workers=2))
        assert barrier_scan(pooled) == barrier_scan(cfg)

    def test_requires_barrier(self):
        """Free space is a configuration error."""
        cfg = barrier_config(pot=PotentialSpec())
        with pytest.raises(ConfigError) as excinfo:
            barrier_scan(cfg)
        assert excinfo.value.key == "barrier.kind"

    def test_start_inside_barrier(self):
        """A start at or past the barrier edge is a configuration error."""
        cfg = barrier_config(barrier_start=0.5)
        with pytest.raises(ConfigError) as excinfo:
            barrier_scan(cfg)
        assert excinfo.value.kind == "range"


class TestCrossingGeometry:
    """Test suite for the crossing segment and the closing leg."""

    def setup_method(self):
        self.cfg = barrier_config()
        self.projection_cfg = dataclasses.replace(self.cfg.sampler, projection=Projection.ROOT_FIND)

    def test_classically_forbidden(self):
        """Forbidden exactly when the kinetic energy is below the barrier height."""
        assert classically_forbidden(self.cfg)
        assert not classically_forbidden(barrier_config(V=0.25))

    def test_slow_crossing_is_physical(self):
        """A slow crossing has a physical interior segment inside the window."""
        scale = crossing_scales(np.array([0.3]), self.cfg, self.projection_cfg)[0]
        assert 0.75 <= scale <= 1.25
        S = segment_actions(scale / 0.3, 1.0, 1.0, 1.0, ActionMode.RELATIVISTIC)
        assert phase_residuals(S)[0] <= 1e-9

    def test_fast_crossing_reflects(self):
        """Near the light cone the interior action spans no multiple of 2π."""
        # S ranges over [-2.17, -1] between the light cone and 1.25 times the sampled time
        assert np.isnan(crossing_scales(np.array([0.95]), self.cfg, self.projection_cfg)[0])

    def test_closing_durations(self):
        """The outgoing leg lands the total action on the next multiple of 2π."""
        S_before = np.array([-4.3, -10.0, 2.0])
        speed = np.array([0.2, 0.5, 0.9])
        T = closing_durations(S_before, speed, 6.0, 1.0)
        rate = np.sqrt(1.0 - speed ** 2)
        assert np.all(T >= 6.0)
        assert np.all(T < 6.0 + TWO_PI / rate)
        np.testing.assert_allclose(phase_residuals(S_before - rate * T)[0], 0.0, atol=1e-12)

    def test_kinetic_energy_round_trip(self):
        """The canonical particle has p = 1."""
        assert self.cfg.particle.momentum == pytest.approx(1.0)
        assert dataclasses.replace(self.cfg, barrier_start=-2.0).barrier_start == -2.0
