"""
Barrier tunnelling scan
Samples crossing paths through a rectangular barrier and keeps those that admit a physical path
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.errors import ConfigError
from core.gauge import DEFAULT_TOLERANCE, phase_residuals
from core.models import (
    TWO_PI, ActionMode, Event, ExperimentConfig, PotentialKind, Projection, SamplerConfig, TunnelingReport
)
from core.sampler import jittered_polylines, map_streams, polyline_actions, projection_scales, stream_sizes
from core.spacetime import segment_actions

logger = logging.getLogger(__name__)

SPEED_RANGE = (0.2, 0.95)


@dataclass(frozen=True)
class StreamCrossings:
    """Outcome of one sampling stream."""
    n_transmitted: int
    speeds: np.ndarray


def classically_forbidden(cfg: ExperimentConfig) -> bool:
    return cfg.particle.kinetic_energy < cfg.pot.V


def crossing_scales(crossing_speed: np.ndarray, cfg: ExperimentConfig, projection_cfg: SamplerConfig) -> np.ndarray:
    """
    Time scale that makes each barrier-interior segment physical on its own.

    A segment crossing the barrier at `crossing_speed` is projected between
    the two barrier edges with equal states at both ends.

    Returns:
        Scale per segment, NaN where no physical segment lies inside the projection window
    """
    pot = cfg.pot
    crossing_speed = np.asarray(crossing_speed, dtype=float)
    elapsed = (pot.width / crossing_speed)[:, None]
    length = np.full_like(elapsed, pot.width)
    return projection_scales(elapsed, length, pot.V, 1.0, cfg.particle.mass, 0.0, projection_cfg)


def closing_durations(S_before: np.ndarray, exit_speed: np.ndarray, shortest: float, mass: float) -> np.ndarray:
    """
    Shortest free outgoing leg, no shorter than `shortest`, that closes the path on a multiple of 2π.

    At speed v a free leg of duration T contributes -m·sqrt(1 - v²)·T.
    """
    rate = mass * np.sqrt(1.0 - exit_speed ** 2)
    k = np.floor((S_before - rate * shortest) / TWO_PI)
    return (S_before - TWO_PI * k) / rate


def _barrier_stream(
    index: int,
    sequence: np.random.SeedSequence,
    cfg: ExperimentConfig,
    projection_cfg: SamplerConfig,
) -> StreamCrossings:
    """Sample one stream of crossing candidates."""
    pot = cfg.pot
    particle = cfg.particle
    size = stream_sizes(projection_cfg.n_paths, cfg.seeds.stream_count)[index]
    rng = np.random.default_rng(sequence)
    draw_rng = np.random.default_rng(sequence.spawn(1)[0])
    t_entry = (pot.x_lo - cfg.barrier_start) / particle.speed

    # Sample run-ups to the near edge
    run_ups = jittered_polylines(
        Event(0.0, cfg.barrier_start), Event(t_entry, pot.x_lo), size, projection_cfg, rng, spatial_dims=1
    )
    S_run = polyline_actions(run_ups, particle, pot, ActionMode.RELATIVISTIC)

    # Draw crossing and exit speeds
    crossing_speed = draw_rng.uniform(*SPEED_RANGE, size)
    exit_speed = draw_rng.uniform(*SPEED_RANGE, size)
    crossing_time = pot.width / crossing_speed

    # Inside a forbidden barrier the crossing segment must itself be physical
    if classically_forbidden(cfg):
        scale = crossing_scales(crossing_speed, cfg, projection_cfg)
        crossed = np.isfinite(scale)
        crossing_time = crossing_time * np.where(crossed, scale, 1.0)
    else:
        crossed = np.ones(size, dtype=bool)
    S_in = segment_actions(crossing_time, pot.width, pot.V, particle.mass, ActionMode.RELATIVISTIC)

    # Close the whole path on the outgoing leg
    S_before = S_run + S_in
    finite = np.isfinite(S_before)
    exit_time = closing_durations(np.where(finite, S_before, 0.0), exit_speed, t_entry, particle.mass)
    exit_x = pot.x_hi + 0.5 * exit_speed * exit_time
    S_out = segment_actions(
        exit_time, exit_speed * exit_time, pot.values_at(exit_x), particle.mass, ActionMode.RELATIVISTIC
    )
    omega, _ = phase_residuals(np.where(finite, S_before + S_out, math.pi))
    transmitted = crossed & finite & (omega <= DEFAULT_TOLERANCE)

    logger.debug(
        f"Barrier stream {index}: {int(np.count_nonzero(crossed))} of {size} crossings physical, "
        f"{int(np.count_nonzero(transmitted))} transmitted"
    )
    return StreamCrossings(
        n_transmitted=int(np.count_nonzero(transmitted)),
        speeds=exit_speed[transmitted],
    )


def barrier_scan(cfg: ExperimentConfig) -> TunnelingReport:
    """
    Count sampled barrier crossings that admit a physical path.

    Every attempt runs up to the barrier along a jittered path, crosses it
    at a sampled speed and leaves at another. Below the barrier height the
    crossing segment has to be a physical path between the two edges on its
    own; attempts whose crossing cannot be projected onto one reflect. A
    free outgoing leg then closes each surviving path on a multiple of 2π.

    Raises:
        ConfigError: If the potential is not a barrier or the start lies inside or past it
    """
    pot = cfg.pot
    if pot.kind is not PotentialKind.BARRIER:
        raise ConfigError("range", "barrier scan needs barrier.kind = barrier", key="barrier.kind")
    if cfg.barrier_start >= pot.x_lo:
        raise ConfigError(
            "range",
            f"barrier region [{pot.x_lo}, {pot.x_hi}] lies outside the sampled domain starting at {cfg.barrier_start}",
            key="barrier.start",
        )

    sampler = cfg.sampler
    if sampler.projection is not Projection.ROOT_FIND:
        logger.info("Barrier scan always projects by root finding")
    projection_cfg = dataclasses.replace(sampler, projection=Projection.ROOT_FIND, action_mode=ActionMode.RELATIVISTIC)
    logger.info(
        f"Barrier scan: V={pot.V}, [{pot.x_lo}, {pot.x_hi}], E_kin={cfg.particle.kinetic_energy:.6g}, "
        f"{sampler.n_paths} attempts"
    )

    streams = map_streams(_barrier_stream, cfg.seeds, sampler.workers, cfg=cfg, projection_cfg=projection_cfg)
    n_transmitted = sum(s.n_transmitted for s in streams)
    speeds: Tuple[float, ...] = tuple(float(v) for s in streams for v in s.speeds)

    logger.info(f"Barrier scan: {n_transmitted} of {sampler.n_paths} attempts transmitted")
    return TunnelingReport(n_attempts=sampler.n_paths, n_transmitted=n_transmitted, emergent_speeds=speeds)
