"""
Tests for seeded sampling, projection and screen histograms.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.errors import InvalidEndpointError, ScreenGeometryError
from core.gauge import phase_residual
from core.models import (
    ActionMode, DensityParams, Event, ParticleParams, PhaseState, PotentialSpec, SamplerConfig,
    ScreenSpec, SeedSpec, TWO_PI
)
from core.sampler import (
    ScreenHistogram, accumulate_screen, band_filter, filter_residuals, jittered_polylines, map_streams,
    merge_histograms, polyline_actions, project_to_physical, projection_scales, polyline_to_path, run_streams,
    sample_paths, screen_coordinates, stream_sizes
)
from core.spacetime import path_action, straight_path

KAPPAS = (PhaseState(0.0), PhaseState(0.0))


def _uniform_stream(index, sequence, screen, size):
    """Module-level stream worker: uniform terminals on the screen."""
    rng = np.random.default_rng(sequence)
    histogram = ScreenHistogram(screen)
    histogram.add(rng.uniform(screen.x_min - 1.0, screen.x_max + 1.0, size))
    return histogram


class TestSamplePaths:
    """Test suite for sample_paths."""

    def setup_method(self):
        self.endpoints = (Event(0.0, 0.0), Event(10.0, 2.0))
        self.cfg = SamplerConfig(n_paths=50, n_joints=3, perturb_scale=0.1)
        self.seeds = SeedSpec(master_seed=7, stream_count=3)

    def test_count_and_endpoints(self):
        """Every sampled path joins the requested endpoints."""
        paths = sample_paths(self.endpoints, self.cfg, self.seeds)
        assert len(paths) == 50
        for path in paths:
            assert path.events[0] == self.endpoints[0]
            assert path.events[-1] == self.endpoints[1]
            assert len(path.events) == 5

    def test_reproducible(self):
        """Same seed, same paths."""
        assert sample_paths(self.endpoints, self.cfg, self.seeds) == sample_paths(self.endpoints, self.cfg, self.seeds)

    def test_different_seed_differs(self):
        """A different master seed changes the batch."""
        other = SeedSpec(master_seed=8, stream_count=3)
        assert sample_paths(self.endpoints, self.cfg, self.seeds) != sample_paths(self.endpoints, self.cfg, other)

    def test_reversed_time_rejected(self):
        """The end event must come later."""
        with pytest.raises(InvalidEndpointError):
            sample_paths((Event(1.0, 0.0), Event(0.0, 0.0)), self.cfg, self.seeds)

    def test_spacelike_endpoints_rejected(self):
        """Relativistic sampling needs timelike endpoints."""
        with pytest.raises(InvalidEndpointError):
            sample_paths((Event(0.0, 0.0), Event(1.0, 2.0)), self.cfg, self.seeds)

    def test_nonrelativistic_allows_fast_endpoints(self):
        """Without the light cone any later end event is fine."""
        cfg = SamplerConfig(n_paths=4, action_mode=ActionMode.NONRELATIVISTIC)
        assert len(sample_paths((Event(0.0, 0.0), Event(1.0, 2.0)), cfg, self.seeds)) == 4

    def test_stream_sizes(self):
        """Shares differ by at most one and sum to the total."""
        sizes = stream_sizes(10, 4)
        assert sizes == [3, 3, 2, 2]

    def test_jitter_only_moves_interior_joints(self):
        """Time fractions stay on the straight line."""
        batch = jittered_polylines(Event(0, 0), Event(4, 1), 5, self.cfg, np.random.default_rng(0))
        assert batch.shape == (5, 5, 3)
        np.testing.assert_allclose(batch[:, :, 0], np.tile([0, 1, 2, 3, 4], (5, 1)))

    def test_single_path_without_joints_is_straight(self):
        """One path with no joints is the straight line between the endpoints."""
        cfg = SamplerConfig(n_paths=1, n_joints=0)
        assert sample_paths(self.endpoints, cfg, self.seeds) == [straight_path(*self.endpoints)]

    def test_actions_converge_quadratically(self):
        """Halving the jitter scale cuts the action offset from the straight line by four."""
        particle = ParticleParams(mass=1.0, momentum=1.0)
        straight = -math.sqrt(10.0 ** 2 - 2.0 ** 2)
        offsets = []
        for scale in (0.1, 0.05, 0.025):
            cfg = SamplerConfig(n_paths=20, n_joints=3, perturb_scale=scale)
            paths = sample_paths(self.endpoints, cfg, self.seeds)
            offsets.append(max(abs(path_action(p, particle, PotentialSpec()) - straight) for p in paths))
        assert offsets[0] < 0.1
        for coarse, fine in zip(offsets, offsets[1:]):
            assert 3.5 < coarse / fine < 4.5


class TestProjection:
    """Test suite for project_to_physical."""

    def setup_method(self):
        self.particle = ParticleParams(mass=1.0, momentum=1.0)
        self.free = PotentialSpec()

    def test_projection_reaches_physical_set(self):
        """A projected path satisfies the physicality condition."""
        path = straight_path(Event(0.0, 0.0), Event(30.0, 5.0), n_pieces=2)
        projected = project_to_physical(path, self.particle, self.free, KAPPAS, SamplerConfig())
        assert projected is not None
        S = path_action(projected, self.particle, self.free)
        assert phase_residual(S).omega <= 1e-9

    def test_physical_path_unchanged(self):
        """A path already on the physical set comes back as is."""
        path = straight_path(Event(0.0, 0.0), Event(2.0 * math.pi, 0.0))
        assert project_to_physical(path, self.particle, self.free, KAPPAS, SamplerConfig()) is path

    def test_nonrelativistic_projection(self):
        """Non-relativistic paths just short of 2π get projected."""
        cfg = SamplerConfig(action_mode=ActionMode.NONRELATIVISTIC)
        # m·l²/(2t) = 2π - 0.1
        length = math.sqrt(2.0 * (2.0 * math.pi - 0.1))
        path = straight_path(Event(0.0, 0.0), Event(1.0, length))
        projected = project_to_physical(path, self.particle, self.free, KAPPAS, cfg)
        assert projected is not None
        S = path_action(projected, self.particle, self.free, ActionMode.NONRELATIVISTIC)
        assert phase_residual(S).omega <= 1e-9

    def test_no_bracket_returns_none(self):
        """A path whose action barely changes within the window cannot be projected."""
        path = straight_path(Event(0.0, 0.0), Event(1.0, 0.0))
        particle = ParticleParams(mass=1.0, momentum=1.0)
        # S(s) = -s ranges over [-1.25, -0.75], which holds no multiple of 2π
        assert project_to_physical(path, particle, self.free, KAPPAS, SamplerConfig()) is None

    def test_bisection_budget_exhausted(self):
        """A one-iteration budget cannot reach 1e-9."""
        path = straight_path(Event(0.0, 0.0), Event(30.0, 5.0), n_pieces=2)
        cfg = SamplerConfig(max_bisection_iters=1)
        assert project_to_physical(path, self.particle, self.free, KAPPAS, cfg) is None

    def test_batch_scales_match_single_projection(self):
        """Row-wise projection scales agree with projecting each path on its own."""
        paths = [straight_path(Event(0.0, 0.0), Event(t, 5.0), n_pieces=2) for t in (30.0, 31.0, 33.5)]
        cfg = SamplerConfig()
        elapsed = np.array([[s.elapsed for s in p.segments()] for p in paths])
        length = np.array([[s.length for s in p.segments()] for p in paths])
        scales = projection_scales(elapsed, length, 0.0, 1.0, 1.0, 0.0, cfg)
        for path, scale in zip(paths, scales):
            projected = project_to_physical(path, self.particle, self.free, KAPPAS, cfg)
            assert projected.terminal.t == pytest.approx(scale * path.terminal.t, rel=1e-12)

    def test_polyline_actions_match_path_action(self):
        """Batch actions equal the per-path action."""
        cfg = SamplerConfig(n_paths=6, n_joints=3, perturb_scale=0.2)
        batch = jittered_polylines(Event(0.0, 0.0), Event(10.0, 2.0), 6, cfg, np.random.default_rng(1))
        actions = polyline_actions(batch, self.particle, self.free)
        for points, S in zip(batch, actions):
            assert S == pytest.approx(path_action(polyline_to_path(points), self.particle, self.free), abs=1e-12)


class TestBandFilter:
    """Test suite for band_filter."""

    def setup_method(self):
        self.particle = ParticleParams(mass=1.0, momentum=1.0)
        self.params = DensityParams(xi_bar=0.5)
        cfg = SamplerConfig(n_paths=200, n_joints=2, perturb_scale=0.3)
        self.paths = sample_paths((Event(0.0, 0.0), Event(20.0, 3.0)), cfg, SeedSpec(1, 2))

    def test_full_tolerance_accepts_everything(self):
        """accept_tol = π keeps every timelike path."""
        accepted, rejected = band_filter(
            self.paths, self.particle, PotentialSpec(), KAPPAS, SamplerConfig(accept_tol=math.pi), self.params
        )
        assert len(accepted) == 200
        assert rejected == 0

    def test_acceptance_monotone_in_tolerance(self):
        """Tighter tolerances accept subsets."""
        counts = []
        for tol in (0.1, 0.5, 1.0, 2.0, math.pi):
            accepted, rejected = band_filter(
                self.paths, self.particle, PotentialSpec(), KAPPAS, SamplerConfig(accept_tol=tol), self.params
            )
            assert len(accepted) + rejected == 200
            counts.append(len(accepted))
        assert counts == sorted(counts)

    def test_weights_are_densities(self):
        """Accepted weights are positive and at most the peak density."""
        accepted, _ = band_filter(
            self.paths, self.particle, PotentialSpec(), KAPPAS, SamplerConfig(), self.params
        )
        weights = np.array([w for _, w in accepted])
        assert np.all(weights > 0)
        assert np.all(weights <= 1.0 / (self.params.a * self.params.xi_bar ** 2) + 1e-12)

    def test_filter_residuals(self):
        """Residuals inside the band are accepted; spacelike actions never are."""
        omega, accepted, weights = filter_residuals(np.array([0.1, 3.0, np.nan, TWO_PI - 0.2]), 0.0, 0.5, self.params)
        np.testing.assert_array_equal(accepted, [True, False, False, True])
        assert omega[3] == pytest.approx(0.2)
        assert weights[0] > weights[3]

    def test_accepted_paths_cluster_near_classical(self):
        """Accepted paths deviate less from the classical path than rejected ones."""
        # the straight path has action -4π and is physical
        cfg = SamplerConfig(n_paths=4000, n_joints=2, perturb_scale=1.0, accept_tol=1.0)
        paths = sample_paths((Event(0.0, 0.0), Event(4.0 * math.pi, 0.0)), cfg, SeedSpec(9, 4))
        accepted, rejected = band_filter(paths, self.particle, PotentialSpec(), KAPPAS, cfg, self.params)
        kept = {id(path) for path, _ in accepted}

        def deviation(path):
            return np.mean([math.hypot(e.x, e.y) for e in path.events[1:-1]])

        accepted_deviation = np.mean([deviation(p) for p in paths if id(p) in kept])
        rejected_deviation = np.mean([deviation(p) for p in paths if id(p) not in kept])
        assert 0 < len(accepted) < 4000
        assert rejected == 4000 - len(accepted)
        assert accepted_deviation < rejected_deviation


class TestScreenHistogram:
    """Test suite for histogram accumulation and merging."""

    def setup_method(self):
        self.screen = ScreenSpec(n_bins=4, distance=10.0, x_min=-2.0, x_max=2.0)

    def test_overflow_counted(self):
        """Coordinates outside [x_min, x_max) go to overflow."""
        histogram = ScreenHistogram(self.screen)
        histogram.add(np.array([-3.0, -1.5, 0.5, 2.0, 5.0]))
        assert histogram.overflow == 3
        assert histogram.entries == 2

    def test_profile_unit_area(self):
        """Normalized profiles integrate to one."""
        histogram = ScreenHistogram(self.screen)
        histogram.add(np.array([-1.5, 0.5, 0.5, 1.2]), np.array([1.0, 2.0, 0.5, 3.0]))
        profile = histogram.to_profile()
        assert profile.total() == pytest.approx(1.0, abs=1e-9)

    def test_empty_profile(self):
        """No entries gives an all-zero profile flagged empty."""
        profile = ScreenHistogram(self.screen).to_profile()
        assert profile.empty
        assert profile.metadata["empty"]

    def test_merge_is_order_independent(self):
        """Merging in any order gives the same weights up to rounding."""
        parts = []
        for seed in range(3):
            histogram = ScreenHistogram(self.screen)
            histogram.add(np.random.default_rng(seed).uniform(-2, 2, 20))
            parts.append(histogram)
        forward = merge_histograms(parts)
        backward = merge_histograms(parts[::-1])
        np.testing.assert_allclose(forward.weights, backward.weights, rtol=1e-12)
        assert forward.entries == backward.entries == 60

    def test_merge_rejects_other_screen(self):
        """Histograms of different screens do not merge."""
        other = ScreenHistogram(ScreenSpec(n_bins=5, distance=10.0, x_min=-2.0, x_max=2.0))
        with pytest.raises(ValueError):
            ScreenHistogram(self.screen).merge(other)

    def test_accumulate_screen(self):
        """Terminals on the screen plane are binned by their x coordinate."""
        paths = [
            (straight_path(Event(0.0, 0.0), Event(20.0, x, 10.0)), 1.0) for x in (-1.5, -0.5, 0.5, 3.0)
        ]
        profile = accumulate_screen(paths, self.screen)
        assert profile.overflow == 1
        assert profile.total() == pytest.approx(1.0)

    def test_accumulate_screen_bin_counts(self):
        """Three unit paths in bins 0, 0 and 2 give densities proportional to [2, 0, 1, 0]."""
        paths = [(straight_path(Event(0.0, 0.0), Event(20.0, x, 10.0)), 1.0) for x in (-1.5, -1.2, 0.5)]
        profile = accumulate_screen(paths, self.screen)
        np.testing.assert_allclose(profile.gauge_density, np.array([2.0, 0.0, 1.0, 0.0]) / 3.0)
        assert profile.overflow == 0

    def test_split_and_merge_matches_single_pass(self):
        """Merging the histograms of two halves reproduces the single-pass profile."""
        rng = np.random.default_rng(4)
        paths = [
            (straight_path(Event(0.0, 0.0), Event(20.0, x, 10.0)), w)
            for x, w in zip(rng.uniform(-2.5, 2.5, 40), rng.uniform(0.1, 2.0, 40))
        ]
        halves = []
        for part in (paths[:20], paths[20:]):
            histogram = ScreenHistogram(self.screen)
            histogram.add(screen_coordinates([p for p, _ in part], self.screen), np.array([w for _, w in part]))
            halves.append(histogram)
        merged = halves[0].merge(halves[1]).to_profile()
        single = accumulate_screen(paths, self.screen)
        np.testing.assert_allclose(merged.gauge_density, single.gauge_density, rtol=0, atol=1e-12)
        assert merged.overflow == single.overflow

    def test_off_plane_terminal(self):
        """A terminal far from the screen plane is a geometry error."""
        paths = [(straight_path(Event(0.0, 0.0), Event(20.0, 0.0, 3.0)), 1.0)]
        with pytest.raises(ScreenGeometryError):
            accumulate_screen(paths, self.screen)


class TestStreams:
    """Test suite for seeded stream evaluation."""

    def setup_method(self):
        self.screen = ScreenSpec(n_bins=8, distance=1.0, x_min=-1.0, x_max=1.0)
        self.seeds = SeedSpec(master_seed=3, stream_count=4)

    def test_streams_reproducible(self):
        """Identical seeds give identical merged histograms."""
        a = run_streams(_uniform_stream, self.seeds, screen=self.screen, size=100)
        b = run_streams(_uniform_stream, self.seeds, screen=self.screen, size=100)
        np.testing.assert_array_equal(a.weights, b.weights)
        assert a.overflow == b.overflow

    def test_pool_matches_serial(self):
        """Process-pool evaluation returns the same per-stream histograms."""
        serial = map_streams(_uniform_stream, self.seeds, 1, screen=self.screen, size=100)
        pooled = map_streams(_uniform_stream, self.seeds, 2, screen=self.screen, size=100)
        for a, b in zip(serial, pooled):
            np.testing.assert_array_equal(a.weights, b.weights)

    @settings(max_examples=20, deadline=None)
    @given(st.permutations(range(4)))
    def test_stream_independent_of_order(self, order):
        """Stream i produces the same histogram whatever order the streams run in."""
        sequences = self.seeds.spawn()
        reference = [_uniform_stream(i, s, self.screen, 50).weights for i, s in enumerate(sequences)]
        for i in order:
            fresh = SeedSpec(master_seed=3, stream_count=4).spawn()[i]
            np.testing.assert_array_equal(_uniform_stream(i, fresh, self.screen, 50).weights, reference[i])
