"""
Double-slit experiment driver
Gauge density profiles for correlated slit pairs, intrusion, screen sweeps and fringe analysis
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks
from scipy.stats import norm

from core.errors import GeometryError
from core.gauge import bin_averaged_density, mean_density
from core.models import (
    TWO_PI, DensityProfile, Estimator, ExperimentConfig, IntrusionMode, IntrusionStage, OracleMode
)
from core.sampler import (
    ScreenHistogram, filter_residuals, map_streams, polyline_batch, polyline_lengths, run_streams, stream_sizes
)
from oracle.wave import arm_lengths, dark_fringe_positions, oracle_profile, solve_path_difference, two_slit_wave_intensity

logger = logging.getLogger(__name__)

KICK_NODES = 32
KICK_GRID = 128
PROMINENCE_FRACTION = 0.2


@dataclass(frozen=True)
class SlitGeometry:
    """
    Slits at x = ±d/2 on y = 0 and a screen on y = L.

    Each slit images onto the screen as a Gaussian of spread
    σ(L) = slit_width/2 + divergence·L; the two images overlap by
    η = exp(-d²/(8σ²)).
    """
    separation: float
    distance: float
    slit_width: float
    divergence: float

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "SlitGeometry":
        if cfg.screen.axis != "x":
            raise GeometryError("Slit experiments need a screen measured along x")
        if cfg.distance <= 0:
            raise GeometryError(f"Screen must lie beyond the slit plane, got L = {cfg.distance}")
        return cls(cfg.slit_separation, cfg.distance, cfg.slit_width, cfg.divergence)

    @property
    def spread(self) -> float:
        return 0.5 * self.slit_width + self.divergence * self.distance

    @property
    def overlap(self) -> float:
        return math.exp(-self.separation ** 2 / (8.0 * self.spread ** 2))

    @property
    def slits(self) -> Tuple[float, float]:
        half = 0.5 * self.separation
        return -half, half


def path_difference(x, cfg: ExperimentConfig):
    """Exact arm-length difference r1(x) - r2(x) to the screen point (x, L)."""
    r1, r2 = arm_lengths(x, cfg)
    return r1 - r2


def fringe_solutions(cfg: ExperimentConfig, n_range: Iterable[int]) -> List[Tuple[int, float]]:
    """Screen positions where the path difference equals n·λ, for each n that has one."""
    solutions = []
    for n in n_range:
        x = solve_path_difference(n * cfg.particle.wavelength, cfg)
        if x is not None:
            solutions.append((n, x))
    return solutions


def intrusion_suppression(cfg: ExperimentConfig) -> float:
    """Weight 1 - exp(-s²/2) handed from the pair term to the monotonic baseline."""
    s = cfg.intrusion.spread(cfg.slit_separation)
    return 1.0 - math.exp(-0.5 * s * s)


def kick_quadrature(cfg: ExperimentConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights for averaging over the intrusion phase δκ.

    Random kicks follow a wrapped normal of standard deviation q·d;
    narrow spreads use Gauss-Hermite nodes, wide ones a uniform grid on
    the circle with wrapped-normal weights.
    """
    intrusion = cfg.intrusion
    if intrusion.mode is IntrusionMode.FIXED_PHASE:
        return np.array([intrusion.delta_kappa]), np.ones(1)
    s = intrusion.spread(cfg.slit_separation)
    if intrusion.mode is IntrusionMode.NONE or s == 0.0:
        return np.zeros(1), np.ones(1)
    if s <= math.pi:
        nodes, weights = hermegauss(KICK_NODES)
        return s * nodes, weights / np.sum(weights)
    grid = -math.pi + TWO_PI * (np.arange(KICK_GRID) + 0.5) / KICK_GRID
    wraps = np.arange(-(int(4 * s / TWO_PI) + 2), int(4 * s / TWO_PI) + 3)
    weights = np.sum(np.exp(-0.5 * ((grid[:, None] + TWO_PI * wraps[None, :]) / s) ** 2), axis=1)
    return grid, weights / np.sum(weights)


def _normal_bin_average(edges: np.ndarray, center: float, spread: float) -> np.ndarray:
    return np.diff(norm.cdf(edges, loc=center, scale=spread)) / np.diff(edges)


def monotonic_baseline(cfg: ExperimentConfig) -> np.ndarray:
    """Bin-averaged ½[N(x; -d/2, σ) + N(x; d/2, σ)]."""
    geometry = SlitGeometry.from_config(cfg)
    edges = cfg.screen.bin_edges
    left, right = geometry.slits
    return 0.5 * (
        _normal_bin_average(edges, left, geometry.spread) + _normal_bin_average(edges, right, geometry.spread)
    )


def _normalized(density: np.ndarray, bin_width: float) -> np.ndarray:
    total = float(np.sum(density)) * bin_width
    return density / total if total > 0 else np.zeros_like(density)


def analytic_profile(cfg: ExperimentConfig, extra_phase: float = 0.0) -> np.ndarray:
    """
    Analytic gauge density at the screen bins.

    The pair term is the neighbourhood density of the pair residual averaged
    exactly over each bin (phase linear within a bin) and over the intrusion
    phase, relative to its period mean, under the pair envelope. A pre-slit
    kick shifts the state difference at the source; a post-slit kick is
    picked up by the second arm's action instead. The monotonic baseline is
    added and the sum normalized to unit area.
    """
    geometry = SlitGeometry.from_config(cfg)
    edges = cfg.screen.bin_edges
    phase_edges = cfg.particle.momentum * path_difference(edges, cfg)
    density = cfg.density
    post_slit = cfg.intrusion.stage is IntrusionStage.POST_SLIT

    deltas, weights = kick_quadrature(cfg)
    pair = np.zeros(cfg.screen.n_bins)
    for delta, weight in zip(deltas, weights):
        if post_slit:
            action_edges = phase_edges - delta
            target = extra_phase
        else:
            action_edges = phase_edges
            target = delta + extra_phase
        pair += weight * bin_averaged_density(action_edges[:-1] - target, action_edges[1:] - target, density)
    pair /= mean_density(density)

    envelope = _normal_bin_average(edges, 0.0, geometry.spread)
    beta = intrusion_suppression(cfg)
    raw = (1.0 - beta) * cfg.pair_weight * geometry.overlap * envelope * pair + monotonic_baseline(cfg)
    return _normalized(raw, cfg.screen.bin_width)


def kink_length_change(batch: np.ndarray, fraction: np.ndarray, offset: np.ndarray) -> np.ndarray:
    """
    Length added to each polyline by a joint inserted at a time fraction.

    The joint sits on the polyline at `fraction` of its duration, displaced
    spatially by `offset` (shape (n, 2)).
    """
    n_segments = batch.shape[1] - 1
    position = fraction * n_segments
    index = np.minimum(position.astype(np.int64), n_segments - 1)
    local = (position - index)[:, None]
    rows = np.arange(batch.shape[0])
    a = batch[rows, index, 1:]
    b = batch[rows, index + 1, 1:]
    kink = a + local * (b - a) + offset

    def span(p, q):
        return np.hypot(*(q - p).T)

    return span(a, kink) + span(kink, b) - span(a, b)


def _monte_carlo_stream(
    index: int,
    sequence: np.random.SeedSequence,
    cfg: ExperimentConfig,
    extra_phase: float,
) -> ScreenHistogram:
    """Sample one stream of pair and monotonic paths and histogram their screen terminals."""
    sizes = stream_sizes(cfg.sampler.n_paths, cfg.seeds.stream_count)
    size = sizes[index]
    n_pair_total = sum(s // 2 for s in sizes)
    n_mono_total = cfg.sampler.n_paths - n_pair_total
    n_pair = size // 2
    n_mono = size - n_pair

    geometry = SlitGeometry.from_config(cfg)
    screen = cfg.screen
    particle = cfg.particle
    intrusion = cfg.intrusion
    rng = np.random.default_rng(sequence)
    # path draws never depend on the intrusion
    kick_rng = np.random.default_rng(sequence.spawn(1)[0])
    histogram = ScreenHistogram(screen)

    if n_pair:
        # Sample pair arms from both slits to a common screen point
        x_b = rng.uniform(screen.x_min, screen.x_max, n_pair)
        r1, r2 = arm_lengths(x_b, cfg)
        left, right = geometry.slits
        starts_1 = np.column_stack([np.zeros(n_pair), np.full(n_pair, left), np.zeros(n_pair)])
        starts_2 = np.column_stack([np.zeros(n_pair), np.full(n_pair, right), np.zeros(n_pair)])
        ends_1 = np.column_stack([r1 / particle.speed, x_b, np.full(n_pair, geometry.distance)])
        ends_2 = np.column_stack([r2 / particle.speed, x_b, np.full(n_pair, geometry.distance)])
        arms_1 = polyline_batch(starts_1, ends_1, cfg.sampler, rng)
        arms_2 = polyline_batch(starts_2, ends_2, cfg.sampler, rng)
        arm_1 = polyline_lengths(arms_1)
        arm_2 = polyline_lengths(arms_2)

        # Draw the intrusion
        kicked = intrusion.mode is not IntrusionMode.NONE
        post_slit = kicked and intrusion.stage is IntrusionStage.POST_SLIT
        if post_slit:
            fraction = kick_rng.uniform(0.0, 1.0, n_pair)
            offset = kick_rng.normal(0.0, cfg.sampler.perturb_scale, (n_pair, 2))
        if intrusion.mode is IntrusionMode.RANDOM_KICK:
            delta = kick_rng.normal(0.0, intrusion.spread(cfg.slit_separation), n_pair)
        else:
            delta = np.full(n_pair, intrusion.delta_kappa)

        # A post-slit kick is a joint on the second arm whose phase enters its action
        if post_slit:
            arm_2 = arm_2 + kink_length_change(arms_2, fraction, offset)
            action = particle.momentum * (arm_1 - arm_2) - delta
            target = np.full(n_pair, extra_phase)
        else:
            action = particle.momentum * (arm_1 - arm_2)
            target = delta + extra_phase

        _, accepted, density = filter_residuals(action, target, cfg.sampler.accept_tol, cfg.density)
        scale = (
            (1.0 - intrusion_suppression(cfg)) * cfg.pair_weight * geometry.overlap
            * (screen.x_max - screen.x_min) / (n_pair_total * mean_density(cfg.density))
        )
        weight = scale * norm.pdf(x_b, 0.0, geometry.spread) * density
        histogram.add(x_b[accepted], weight[accepted])
        logger.debug(f"Stream {index}: accepted {int(np.count_nonzero(accepted))} of {n_pair} pair samples")

    if n_mono:
        # Monotonic paths through one slit
        centers = np.where(rng.integers(0, 2, n_mono) == 0, *geometry.slits)
        x_mono = rng.normal(centers, geometry.spread)
        histogram.add(x_mono, np.full(n_mono, 1.0 / n_mono_total))

    return histogram


def monte_carlo_histograms(cfg: ExperimentConfig, extra_phase: float = 0.0) -> List[ScreenHistogram]:
    """Per-stream histograms of the Monte Carlo estimator."""
    return map_streams(_monte_carlo_stream, cfg.seeds, cfg.sampler.workers, cfg=cfg, extra_phase=extra_phase)


def monte_carlo_histogram(cfg: ExperimentConfig, extra_phase: float = 0.0) -> ScreenHistogram:
    """Merged histogram of the Monte Carlo estimator over all streams."""
    return run_streams(_monte_carlo_stream, cfg.seeds, cfg.sampler.workers, cfg=cfg, extra_phase=extra_phase)


def slit_profile(cfg: ExperimentConfig, extra_phase: float = 0.0) -> DensityProfile:
    """Gauge profile of the two-slit geometry with an additional pair phase."""
    geometry = SlitGeometry.from_config(cfg)
    logger.info(
        f"Two-slit profile: d={cfg.slit_separation}, L={cfg.distance}, estimator={cfg.estimator.value}, "
        f"intrusion={cfg.intrusion.mode.value}"
    )
    metadata = {
        "estimator": cfg.estimator.value,
        "master_seed": cfg.seeds.master_seed,
        "distance": cfg.distance,
        "spread": geometry.spread,
        "overlap": geometry.overlap,
        "suppression": intrusion_suppression(cfg),
        "pair_weight": cfg.pair_weight,
        "intrusion_stage": cfg.intrusion.stage.value,
        "proposal": "jittered_polyline",
        "density_a": cfg.density.a,
        "density_b": cfg.density.b,
        "density_xi_bar": cfg.density.xi_bar,
    }

    if cfg.estimator is Estimator.ANALYTIC:
        gauge = analytic_profile(cfg, extra_phase)
        overflow = 0
    else:
        histogram = monte_carlo_histogram(cfg, extra_phase)
        mc_profile = histogram.to_profile()
        gauge = mc_profile.gauge_density
        overflow = histogram.overflow
        metadata["entries"] = histogram.entries
        logger.info(f"Monte Carlo: {histogram.entries} entries, {overflow} outside the screen")
        if cfg.estimator is Estimator.BOTH:
            reference = analytic_profile(cfg, extra_phase)
            metadata["analytic_l1"] = float(np.sum(np.abs(gauge - reference)) * cfg.screen.bin_width)

    profile = DensityProfile(
        bin_centers=cfg.screen.bin_centers,
        gauge_density=gauge,
        overflow=overflow,
        metadata=metadata,
    )
    profile.metadata["empty"] = profile.empty
    return profile


def double_slit(cfg: ExperimentConfig) -> DensityProfile:
    """
    Screen density of particles passing a double slit.

    Args:
        cfg: Experiment configuration (geometry, intrusion, estimator, seeds)

    Returns:
        Unit-area DensityProfile with provenance metadata
    """
    return slit_profile(cfg)


def with_oracle(profile: DensityProfile, cfg: ExperimentConfig) -> DensityProfile:
    """Attach the normalized two-slit wave intensity as the oracle column."""
    profile.oracle_density = oracle_profile(cfg)
    profile.metadata["oracle_mode"] = cfg.oracle_mode.value
    return profile


def single_slit_profile(cfg: ExperimentConfig, slit: int) -> np.ndarray:
    """Unit-area monotonic profile of slit 0 (at -d/2) or slit 1 (at +d/2)."""
    if slit not in (0, 1):
        raise ValueError(f"slit must be 0 or 1, got {slit}")
    geometry = SlitGeometry.from_config(cfg)
    density = _normal_bin_average(cfg.screen.bin_edges, geometry.slits[slit], geometry.spread)
    return _normalized(density, cfg.screen.bin_width)


def screen_distance_sweep(cfg: ExperimentConfig, distances: Sequence[float]) -> List[DensityProfile]:
    """
    One profile per screen distance under the same seeds.

    Raises:
        GeometryError: If the distances are not positive and strictly ascending
    """
    distances = [float(L) for L in distances]
    if not distances or any(L <= 0 for L in distances):
        raise GeometryError("Sweep distances must be positive")
    if any(b <= a for a, b in zip(distances, distances[1:])):
        raise GeometryError("Sweep distances must be strictly ascending")

    profiles = []
    for L in distances:
        stepped = dataclasses.replace(cfg, screen=cfg.screen.at_distance(L))
        profile = double_slit(stepped)
        profile.metadata["visibility"] = fringe_visibility(profile, stepped)
        profiles.append(profile)
    logger.info(f"Sweep over {len(distances)} distances complete")
    return profiles


def smoothed(profile: DensityProfile) -> np.ndarray:
    """Three-bin moving average with edge values repeated."""
    return uniform_filter1d(profile.gauge_density, size=3, mode="nearest")


def detect_fringes(profile: DensityProfile, prominence_fraction: float = PROMINENCE_FRACTION) -> np.ndarray:
    """
    Bin indices of the fringe maxima.

    Maxima are 3-point local maxima of the smoothed profile whose
    prominence exceeds prominence_fraction of its range.
    """
    values = smoothed(profile)
    spread = float(np.max(values) - np.min(values))
    if spread <= 0:
        return np.array([], dtype=int)
    peaks, _ = find_peaks(values, prominence=prominence_fraction * spread)
    return peaks


def fringe_period(cfg: ExperimentConfig) -> float:
    """Small-angle fringe spacing L·λ/d."""
    return cfg.distance * cfg.particle.wavelength / cfg.slit_separation


def fringe_visibility(profile: DensityProfile, cfg: ExperimentConfig) -> float:
    """
    (I_max - I_min)/(I_max + I_min) around the smoothed global maximum.

    I_min is the smallest smoothed value within one fringe period of the
    maximum.
    """
    values = smoothed(profile)
    peak = int(np.argmax(values))
    window = np.abs(profile.bin_centers - profile.bin_centers[peak]) <= fringe_period(cfg)
    i_max = float(values[peak])
    i_min = float(np.min(values[window]))
    if i_max + i_min <= 0:
        return 0.0
    return (i_max - i_min) / (i_max + i_min)


def nonzero_minimum_report(profile: DensityProfile, cfg: ExperimentConfig) -> Dict[str, float]:
    """
    Gauge and oracle minimum-to-peak ratios over the central fringes.

    The gauge ratio is taken between the maxima neighbouring the central
    one; the oracle ratio is the idealized wave intensity at the exact dark
    fringes next to the centre over its peak value 4.
    """
    maxima = detect_fringes(profile)
    values = profile.gauge_density
    if len(maxima) >= 3:
        centre = int(np.argmin(np.abs(profile.bin_centers[maxima])))
        lo = maxima[max(centre - 1, 0)]
        hi = maxima[min(centre + 1, len(maxima) - 1)]
        region = values[lo:hi + 1]
    else:
        region = values
    peak = float(np.max(region))
    gauge_ratio = float(np.min(region)) / peak if peak > 0 else 0.0

    ideal = dataclasses.replace(cfg, oracle_mode=OracleMode.IDEALIZED)
    dark = dark_fringe_positions(ideal, (-1, 0))
    oracle_ratio = max((two_slit_wave_intensity(x, ideal) for x in dark), default=float("nan")) / 4.0

    report = {
        "gauge_min_ratio": gauge_ratio,
        "oracle_min_ratio": oracle_ratio,
        "central_fringes": float(len(maxima)),
    }
    logger.info(f"Central minimum/peak: gauge {gauge_ratio:.4g}, oracle {oracle_ratio:.3g}")
    return report


def profile_l1(a, b, bin_width: float = None) -> float:
    """L1 distance between two profiles on the same bins."""
    if isinstance(a, DensityProfile):
        bin_width = a.bin_width if bin_width is None else bin_width
        a = a.gauge_density
    if isinstance(b, DensityProfile):
        b = b.gauge_density
    if bin_width is None:
        raise ValueError("bin_width is required for raw density arrays")
    return float(np.sum(np.abs(np.asarray(a) - np.asarray(b))) * bin_width)


def stream_standard_error(profiles: Sequence[DensityProfile]) -> float:
    """
    Monte Carlo standard error of the L1 distance between two full runs.

    Each of the k stream profiles deviates from the stream mean with
    k - 1 times the variance of a full run, and the difference of two
    independent full runs carries twice that variance, so the mean
    stream-to-mean L1 distance is scaled by sqrt(2/(k - 1)).
    """
    k = len(profiles)
    if k < 2:
        raise ValueError("Standard error needs at least two stream profiles")
    stacked = np.vstack([p.gauge_density for p in profiles])
    mean = stacked.mean(axis=0)
    bin_width = profiles[0].bin_width
    distances = np.sum(np.abs(stacked - mean), axis=1) * bin_width
    return float(np.mean(distances) * math.sqrt(2.0 / (k - 1)))


def stream_profiles(cfg: ExperimentConfig, extra_phase: float = 0.0) -> List[DensityProfile]:
    """Normalized Monte Carlo profile of every stream on its own."""
    return [h.to_profile() for h in monte_carlo_histograms(cfg, extra_phase)]
