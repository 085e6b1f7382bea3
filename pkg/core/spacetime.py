"""
Spacetime paths and the action functionals evaluated along them

Relativistic segments carry -m·sqrt(t(l)² - l²) - V·t(l); the
non-relativistic limit carries m·l²/(2·t(l)) - V·t(l). Correlated pairs are
split at their time peak and the inverted component enters with a minus sign.
"""

import logging
import math
from typing import List, Tuple

import numpy as np

from core.errors import PathError, SpacelikeSegmentError
from core.models import ActionMode, Event, ParticleParams, Path, PotentialKind, PotentialSpec, Segment

logger = logging.getLogger(__name__)


def segment_action_rel(seg: Segment, particle: ParticleParams, pot: PotentialSpec) -> float:
    """
    Relativistic action along one geodesic segment.

    Args:
        seg: Segment with elapsed time t(l) and spatial length l
        particle: Particle supplying the rest mass
        pot: Potential sampled at the segment midpoint

    Returns:
        -m·sqrt(t(l)² - l²) - V·t(l)

    Raises:
        SpacelikeSegmentError: If t(l) <= l
    """
    elapsed = seg.elapsed
    length = seg.length
    if elapsed <= length:
        raise SpacelikeSegmentError(elapsed, length)
    V = pot.value_at(seg.midpoint_x)
    return -particle.mass * math.sqrt(elapsed * elapsed - length * length) - V * elapsed


def segment_action_nonrel(seg: Segment, particle: ParticleParams, pot: PotentialSpec) -> float:
    """Non-relativistic action m·l²/(2·t(l)) - V·t(l) of one segment."""
    elapsed = seg.elapsed
    if elapsed <= 0:
        raise PathError(f"Non-relativistic segment needs positive elapsed time, got {elapsed}")
    length = seg.length
    V = pot.value_at(seg.midpoint_x)
    return particle.mass * length * length / (2.0 * elapsed) - V * elapsed


def segment_actions(
    elapsed: np.ndarray,
    length: np.ndarray,
    V: np.ndarray,
    mass: float,
    mode: ActionMode,
) -> np.ndarray:
    """
    Vectorized segment actions.

    Spacelike relativistic segments (and non-positive non-relativistic
    durations) come back as NaN so that batch callers can reject them.
    """
    elapsed = np.asarray(elapsed, dtype=float)
    length = np.asarray(length, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        if mode is ActionMode.RELATIVISTIC:
            interval = elapsed * elapsed - length * length
            kinetic = np.where(elapsed > length, -mass * np.sqrt(np.where(interval > 0, interval, 0.0)), np.nan)
        else:
            kinetic = np.where(elapsed > 0, mass * length * length / (2.0 * elapsed), np.nan)
    return kinetic - V * elapsed


def decompose(path: Path) -> Tuple[Path, Path]:
    """
    Split a correlated pair at its time peak.

    Returns:
        (forward, inverted): both monotonic, both ending at the peak event

    Raises:
        PathError: If the path is monotonic
    """
    if path.monotonic:
        raise PathError("Only non-monotonic paths decompose into a correlated pair")
    k = path.peak_index
    forward = Path(path.events[:k + 1])
    inverted = Path(tuple(reversed(path.events[k:])))
    return forward, inverted


def recombine(forward: Path, inverted: Path) -> Path:
    """Inverse of decompose."""
    if forward.terminal != inverted.terminal:
        raise PathError("Correlated components must share their terminal event")
    return Path(forward.events + tuple(reversed(inverted.events))[1:])


def components(path: Path) -> List[Tuple[Path, float]]:
    """Monotonic components with the sign their action enters with."""
    if path.monotonic:
        return [(path, 1.0)]
    forward, inverted = decompose(path)
    return [(forward, 1.0), (inverted, -1.0)]


def refine_at_barrier(path: Path, pot: PotentialSpec) -> Path:
    """
    Insert joints where a monotonic path crosses a barrier edge.

    After refinement no segment straddles x_lo or x_hi, so the potential
    sampled at each midpoint is constant along the segment.
    """
    if pot.kind is not PotentialKind.BARRIER or not path.monotonic:
        return path
    refined = [path.events[0]]
    for seg in path.segments():
        a, b = seg.start, seg.end
        dx = b.x - a.x
        if dx != 0.0:
            cuts = sorted(
                (edge - a.x) / dx for edge in (pot.x_lo, pot.x_hi)
                if 0.0 < (edge - a.x) / dx < 1.0
            )
            for u in cuts:
                refined.append(Event(a.t + u * (b.t - a.t), a.x + u * dx, a.y + u * (b.y - a.y)))
        refined.append(b)
    if len(refined) == len(path.events):
        return path
    return Path(refined)


def _component_action(path: Path, particle: ParticleParams, pot: PotentialSpec, mode: ActionMode) -> float:
    segment_action = segment_action_rel if mode is ActionMode.RELATIVISTIC else segment_action_nonrel
    refined = refine_at_barrier(path, pot)
    return math.fsum(segment_action(seg, particle, pot) for seg in refined.segments())


def path_action(
    path: Path,
    particle: ParticleParams,
    pot: PotentialSpec,
    mode: ActionMode = ActionMode.RELATIVISTIC,
) -> float:
    """
    Action of a piecewise-geodesic path.

    Args:
        path: Monotonic path or correlated pair
        particle: Particle parameters
        pot: Potential
        mode: Relativistic or non-relativistic functional

    Returns:
        Sum of segment actions; for a pair, forward minus inverted component
    """
    if path is None:
        raise PathError("Cannot evaluate the action of an empty path")
    return math.fsum(
        sign * _component_action(component, particle, pot, mode)
        for component, sign in components(path)
    )


def path_length(path: Path) -> float:
    """Sum of the spatial segment lengths of all components."""
    if path is None:
        raise PathError("Cannot measure an empty path")
    return math.fsum(seg.length for seg in path.segments())


def reduced_action(path: Path, particle: ParticleParams) -> float:
    """
    Fixed-energy free action p·l of a path.

    A monotonic path is physical under it exactly when its length is an
    integral multiple of 2π/p; a pair contributes p times its length
    difference.
    """
    return particle.momentum * math.fsum(
        sign * path_length(component) for component, sign in components(path)
    )


def concat(first: Path, second: Path) -> Path:
    """Join two monotonic paths where the first ends and the second starts."""
    if not (first.monotonic and second.monotonic):
        raise PathError("Only monotonic paths concatenate")
    if first.events[-1] != second.events[0]:
        raise PathError("Paths must share the joining event")
    return Path(first.events + second.events[1:])


def rescale_time(path: Path, scale: float) -> Path:
    """Scale every elapsed time by `scale`, keeping the first event fixed."""
    if scale <= 0:
        raise PathError(f"Time scale must be positive, got {scale}")
    t0 = path.events[0].t
    return Path([Event(t0 + scale * (e.t - t0), e.x, e.y) for e in path.events])


def segment_arrays(path: Path, pot: PotentialSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Per-segment arrays of a path after barrier refinement.

    Returns:
        (elapsed, length, V, sign) with sign -1 on the inverted component
    """
    elapsed, length, V, sign = [], [], [], []
    for component, s in components(path):
        for seg in refine_at_barrier(component, pot).segments():
            elapsed.append(seg.elapsed)
            length.append(seg.length)
            V.append(pot.value_at(seg.midpoint_x))
            sign.append(s)
    return np.array(elapsed), np.array(length), np.array(V), np.array(sign)


def straight_path(start: Event, end: Event, n_pieces: int = 1) -> Path:
    """Straight line from start to end cut into n_pieces collinear segments."""
    u = np.linspace(0.0, 1.0, n_pieces + 1)
    return Path([
        Event(start.t + f * (end.t - start.t), start.x + f * (end.x - start.x), start.y + f * (end.y - start.y))
        for f in u
    ])
