"""
Seeded Monte Carlo path sampling, projection onto physical paths and screen histograms
Streams are spawned from one master seed so every batch is reproducible
"""

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from multiprocessing import Pool
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from core.errors import InvalidEndpointError, ScreenGeometryError
from core.gauge import DEFAULT_TOLERANCE, neighborhood_densities, phase_residual, phase_residuals
from core.models import (
    TWO_PI, ActionMode, DensityParams, DensityProfile, Event, ParticleParams, Path, PhaseState,
    PotentialSpec, SamplerConfig, ScreenSpec, SeedSpec
)
from core.spacetime import path_action, rescale_time, segment_actions, segment_arrays

logger = logging.getLogger(__name__)

PROJECTION_WINDOW = (0.75, 1.25)

T = TypeVar("T")


def _check_endpoints(start: Event, end: Event, mode: ActionMode) -> None:
    elapsed = end.t - start.t
    if elapsed <= 0:
        raise InvalidEndpointError(f"End event must follow the start event in time (elapsed {elapsed})")
    if mode is ActionMode.RELATIVISTIC and elapsed <= start.spatial_distance(end):
        raise InvalidEndpointError(
            f"Endpoints are not timelike separated: elapsed {elapsed}, distance {start.spatial_distance(end)}"
        )


def jittered_polylines(
    start: Event,
    end: Event,
    n: int,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    spatial_dims: int = 2,
) -> np.ndarray:
    """
    Vectorized polyline batch from start to end.

    Interior joints sit at uniform time fractions on the straight line and
    receive Gaussian spatial jitter of scale cfg.perturb_scale.

    Returns:
        Array of shape (n, n_joints + 2, 3) holding (t, x, y) per event
    """
    a = np.tile([start.t, start.x, start.y], (n, 1))
    b = np.tile([end.t, end.x, end.y], (n, 1))
    return polyline_batch(a, b, cfg, rng, spatial_dims)


def polyline_batch(
    starts: np.ndarray,
    ends: np.ndarray,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    spatial_dims: int = 2,
) -> np.ndarray:
    """Jittered polylines between per-row (t, x, y) endpoints of shape (n, 3)."""
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    n = starts.shape[0]
    fractions = np.linspace(0.0, 1.0, cfg.n_joints + 2)
    batch = starts[:, None, :] + fractions[None, :, None] * (ends - starts)[:, None, :]
    if cfg.n_joints > 0 and n > 0:
        jitter = rng.normal(0.0, cfg.perturb_scale, size=(n, cfg.n_joints, spatial_dims))
        batch[:, 1:-1, 1:1 + spatial_dims] += jitter
    return batch


def polyline_lengths(batch: np.ndarray) -> np.ndarray:
    """Spatial length of every polyline in a batch."""
    steps = np.diff(batch[:, :, 1:], axis=1)
    return np.sum(np.hypot(steps[..., 0], steps[..., 1]), axis=1)


def polyline_to_path(points: np.ndarray) -> Path:
    return Path([Event(float(t), float(x), float(y)) for t, x, y in points])


def stream_sizes(total: int, stream_count: int) -> List[int]:
    """Split a sample count into stream_count nearly equal parts."""
    base, extra = divmod(total, stream_count)
    return [base + (1 if i < extra else 0) for i in range(stream_count)]


def sample_paths(
    endpoints: Tuple[Event, Event],
    cfg: SamplerConfig,
    seeds: SeedSpec,
    spatial_dims: int = 2,
) -> List[Path]:
    """
    Sample cfg.n_paths jittered piecewise-linear paths between two events.

    Stream i draws its share of the batch from the i-th child of the master
    seed, so identical inputs give bit-identical batches. With
    spatial_dims = 1 only x is jittered.

    Raises:
        InvalidEndpointError: If the endpoints cannot be joined by a timelike path
    """
    start, end = endpoints
    _check_endpoints(start, end, cfg.action_mode)

    paths: List[Path] = []
    for rng, size in zip(seeds.generators(), stream_sizes(cfg.n_paths, seeds.stream_count)):
        batch = jittered_polylines(start, end, size, cfg, rng, spatial_dims)
        paths.extend(polyline_to_path(points) for points in batch)
    logger.debug(f"Sampled {len(paths)} paths over {seeds.stream_count} streams")
    return paths


def polyline_actions(
    batch: np.ndarray,
    particle: ParticleParams,
    pot: PotentialSpec,
    mode: ActionMode = ActionMode.RELATIVISTIC,
) -> np.ndarray:
    """
    Action of every monotonic polyline in a batch.

    The potential is read at each segment's midpoint, so segments are
    expected not to straddle a barrier edge. Polylines with a spacelike
    segment come back as NaN.
    """
    steps = np.diff(batch, axis=1)
    elapsed = steps[..., 0]
    length = np.hypot(steps[..., 1], steps[..., 2])
    midpoints = 0.5 * (batch[:, 1:, 1] + batch[:, :-1, 1])
    V = pot.values_at(midpoints.ravel()).reshape(midpoints.shape)
    return np.sum(segment_actions(elapsed, length, V, particle.mass, mode), axis=1)


def projection_scales(
    elapsed: np.ndarray,
    length: np.ndarray,
    V: np.ndarray,
    sign: np.ndarray,
    mass: float,
    delta,
    cfg: SamplerConfig,
) -> np.ndarray:
    """
    Time scale factors that make each row of a segment batch physical.

    Every row is bisected on its own inside PROJECTION_WINDOW (narrowed by
    the light cone in relativistic mode) towards the multiple of 2π nearest
    its current residual.

    Args:
        elapsed, length, V, sign: Segment arrays of shape (n, k)
        mass: Rest mass
        delta: Target phase per row (scalar or shape (n,))
        cfg: Sampler configuration (bisection budget, action mode)

    Returns:
        Scale per row; 1.0 for rows already physical, NaN where no root is bracketed
    """
    elapsed = np.atleast_2d(np.asarray(elapsed, dtype=float))
    length = np.atleast_2d(np.asarray(length, dtype=float))
    V = np.broadcast_to(np.asarray(V, dtype=float), elapsed.shape)
    sign = np.broadcast_to(np.asarray(sign, dtype=float), elapsed.shape)
    n = elapsed.shape[0]
    delta = np.broadcast_to(np.asarray(delta, dtype=float), (n,))

    def action(scale: np.ndarray) -> np.ndarray:
        return np.sum(sign * segment_actions(scale[:, None] * elapsed, length, V, mass, cfg.action_mode), axis=1)

    scales = np.full(n, np.nan)
    current = action(np.ones(n))
    finite = np.isfinite(current)
    omega, n_nearest = phase_residuals(np.where(finite, current, 0.0), delta)
    done = finite & (omega <= DEFAULT_TOLERANCE)
    scales[done] = 1.0

    lo = np.full(n, PROJECTION_WINDOW[0])
    hi = np.full(n, PROJECTION_WINDOW[1])
    if cfg.action_mode is ActionMode.RELATIVISTIC:
        with np.errstate(divide="ignore", invalid="ignore"):
            lightcone = np.max(length / elapsed, axis=1) * (1.0 + 1e-12)
        lo = np.maximum(lo, lightcone)
    target = delta + TWO_PI * n_nearest

    with np.errstate(invalid="ignore"):
        f_lo = action(lo) - target
        f_hi = action(hi) - target
        active = finite & ~done & (lo < hi) & np.isfinite(f_lo) & np.isfinite(f_hi) & (f_lo * f_hi <= 0)
    if not np.any(active):
        return scales

    # Bisect every bracketed row at once
    lo, hi, f_lo = lo[active], hi[active], f_lo[active]
    rows = np.flatnonzero(active)
    sub_elapsed, sub_length, sub_V, sub_sign = elapsed[rows], length[rows], V[rows], sign[rows]
    sub_target = target[rows]

    def sub_action(scale: np.ndarray) -> np.ndarray:
        return np.sum(
            sub_sign * segment_actions(scale[:, None] * sub_elapsed, sub_length, sub_V, mass, cfg.action_mode),
            axis=1,
        )

    for _ in range(cfg.max_bisection_iters):
        mid = 0.5 * (lo + hi)
        f_mid = sub_action(mid) - sub_target
        left = f_lo * f_mid <= 0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        f_lo = np.where(left, f_lo, f_mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * hi):
            break

    mid = 0.5 * (lo + hi)
    converged = phase_residuals(sub_action(mid), delta[rows])[0] <= DEFAULT_TOLERANCE
    scales[rows[converged]] = mid[converged]
    logger.debug(f"Projection: {int(np.count_nonzero(converged))} of {n} rows bracketed and converged")
    return scales


def project_to_physical(
    path: Path,
    particle: ParticleParams,
    pot: PotentialSpec,
    kappas: Tuple[PhaseState, PhaseState],
    cfg: SamplerConfig,
) -> Optional[Path]:
    """
    Rescale the elapsed times of a path until it satisfies the physicality condition.

    The scale factor is found by bisection inside a ±25% window around the
    sampled timing, aiming at the multiple of 2π nearest to the current
    residual.

    Args:
        path: Monotonic path or correlated pair
        particle: Particle parameters
        pot: Potential
        kappas: States at the first and last event of the path
        cfg: Sampler configuration (bisection budget, action mode)

    Returns:
        The projected path, the path itself if already physical, or None
    """
    kappa_A, kappa_B = kappas
    delta = kappa_B.angle - kappa_A.angle
    elapsed, length, V, sign = segment_arrays(path, pot)

    scale = float(projection_scales(elapsed, length, V, sign, particle.mass, delta, cfg)[0])
    if math.isnan(scale):
        logger.debug("No physical rescaling inside the projection window")
        return None
    if scale == 1.0:
        return path

    projected = rescale_time(path, scale)
    if phase_residual(path_action(projected, particle, pot, cfg.action_mode), delta).omega > DEFAULT_TOLERANCE:
        return None
    return projected


def filter_residuals(
    S: np.ndarray,
    delta,
    accept_tol: float,
    params: DensityParams,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Band filter on an array of actions.

    Returns:
        (omega, accepted mask, neighbourhood-density weights); non-finite
        actions are never accepted
    """
    S = np.asarray(S, dtype=float)
    finite = np.isfinite(S)
    omega, _ = phase_residuals(np.where(finite, S, 0.0), delta)
    accepted = finite & (omega <= accept_tol)
    return omega, accepted, neighborhood_densities(omega, params)


def band_filter(
    paths: Iterable[Path],
    particle: ParticleParams,
    pot: PotentialSpec,
    kappas: Tuple[PhaseState, PhaseState],
    cfg: SamplerConfig,
    params: DensityParams,
) -> Tuple[List[Tuple[Path, float]], int]:
    """
    Keep paths whose residual lies within cfg.accept_tol.

    Accepted paths carry the neighbourhood density of their unprojected
    residual as weight. Paths with a spacelike segment count as rejected.

    Returns:
        (accepted (path, weight) pairs, number of rejected paths)
    """
    batch = list(paths)
    delta = kappas[1].angle - kappas[0].angle
    S = np.empty(len(batch))
    for i, path in enumerate(batch):
        elapsed, length, V, sign = segment_arrays(path, pot)
        S[i] = np.sum(sign * segment_actions(elapsed, length, V, particle.mass, cfg.action_mode))

    _, accepted, weights = filter_residuals(S, delta, cfg.accept_tol, params)
    kept = [(path, float(weight)) for path, weight, ok in zip(batch, weights, accepted) if ok]
    return kept, len(batch) - len(kept)


@dataclass
class ScreenHistogram:
    """
    Unnormalized weighted screen histogram.

    Histograms of disjoint batches merge by addition; normalization happens
    only in to_profile.
    """
    screen: ScreenSpec
    weights: np.ndarray = field(default=None)
    overflow: int = 0
    entries: int = 0

    def __post_init__(self):
        if self.weights is None:
            self.weights = np.zeros(self.screen.n_bins)

    def add(self, coordinates: np.ndarray, weights: Optional[np.ndarray] = None) -> None:
        """Add terminal screen coordinates with optional weights (default 1)."""
        coordinates = np.asarray(coordinates, dtype=float)
        if weights is None:
            weights = np.ones_like(coordinates)
        weights = np.asarray(weights, dtype=float)

        index = np.floor((coordinates - self.screen.x_min) / self.screen.bin_width).astype(np.int64)
        inside = (index >= 0) & (index < self.screen.n_bins)
        self.overflow += int(np.count_nonzero(~inside))
        self.entries += int(np.count_nonzero(inside))
        self.weights += np.bincount(index[inside], weights=weights[inside], minlength=self.screen.n_bins)

    def merge(self, other: "ScreenHistogram") -> "ScreenHistogram":
        if other.screen != self.screen:
            raise ValueError("Cannot merge histograms of different screens")
        return ScreenHistogram(
            screen=self.screen,
            weights=self.weights + other.weights,
            overflow=self.overflow + other.overflow,
            entries=self.entries + other.entries,
        )

    def to_profile(self) -> DensityProfile:
        """Normalize to unit area; an all-zero histogram gives an empty profile."""
        total = float(np.sum(self.weights))
        if total > 0:
            density = self.weights / (total * self.screen.bin_width)
        else:
            density = np.zeros(self.screen.n_bins)
        return DensityProfile(
            bin_centers=self.screen.bin_centers,
            gauge_density=density,
            overflow=self.overflow,
            metadata={"empty": total <= 0, "entries": self.entries},
        )


def screen_coordinates(paths: Sequence[Path], screen: ScreenSpec) -> np.ndarray:
    """
    Screen coordinate of each path's terminal event.

    Raises:
        ScreenGeometryError: If a terminal lies off the screen plane by more than a bin width
    """
    coords = np.empty(len(paths))
    for i, path in enumerate(paths):
        end = path.terminal
        along, normal = (end.x, end.y) if screen.axis == "x" else (end.y, end.x)
        if abs(normal - screen.distance) > screen.bin_width:
            raise ScreenGeometryError(
                f"Terminal event {end} is off the screen plane at distance {screen.distance}"
            )
        coords[i] = along
    return coords


def accumulate_screen(paths: Iterable[Tuple[Path, float]], screen: ScreenSpec) -> DensityProfile:
    """
    Weighted, unit-area histogram of path terminals on a screen.

    Terminals outside [x_min, x_max) are tallied in the profile's overflow.
    """
    batch = list(paths)
    histogram = ScreenHistogram(screen)
    if batch:
        coords = screen_coordinates([path for path, _ in batch], screen)
        histogram.add(coords, np.array([weight for _, weight in batch], dtype=float))
    profile = histogram.to_profile()
    if histogram.overflow:
        logger.info(f"{histogram.overflow} terminals fell outside the screen range")
    return profile


def map_streams(
    worker: Callable[..., T],
    seeds: SeedSpec,
    workers: int = 1,
    **kwargs,
) -> List[T]:
    """
    Evaluate worker(stream_index, seed_sequence, **kwargs) for every stream.

    With workers > 1 the streams run in a process pool; worker must then be
    a module-level function. Results come back in stream order.
    """
    tasks = list(enumerate(seeds.spawn()))
    job = partial(_call_stream, worker, kwargs)
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=min(workers, len(tasks))) as pool:
            return pool.map(job, tasks)
    return [job(task) for task in tasks]


def merge_histograms(histograms: Sequence[ScreenHistogram]) -> ScreenHistogram:
    """Merge per-stream histograms in the order given."""
    merged = histograms[0]
    for histogram in histograms[1:]:
        merged = merged.merge(histogram)
    return merged


def run_streams(
    worker: Callable[..., ScreenHistogram],
    seeds: SeedSpec,
    workers: int = 1,
    **kwargs,
) -> ScreenHistogram:
    """Evaluate every stream and merge the histograms in stream-index order."""
    return merge_histograms(map_streams(worker, seeds, workers, **kwargs))


def _call_stream(worker: Callable[..., T], kwargs: dict, task: Tuple[int, np.random.SeedSequence]) -> T:
    index, sequence = task
    return worker(index, sequence, **kwargs)
