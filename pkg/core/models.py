"""
Data models for the gauge mechanics simulator
Dataclass models for spacetime events, sampling, experiments and oracle fields
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from core.errors import PathError

TWO_PI = 2.0 * math.pi


class ActionMode(Enum):
    """Action functional used along a path"""
    RELATIVISTIC = "relativistic"
    NONRELATIVISTIC = "nonrelativistic"


class Projection(Enum):
    """How sampled paths are brought onto the physical set"""
    BAND_FILTER = "band_filter"
    ROOT_FIND = "root_find"


class PotentialKind(Enum):
    FREE = "free"
    BARRIER = "barrier"


class IntrusionMode(Enum):
    """Model of the watching photon"""
    NONE = "none"
    FIXED_PHASE = "fixed_phase"
    RANDOM_KICK = "random_kick"


class IntrusionStage(Enum):
    """Where the watching photon meets the particle"""
    PRE_SLIT = "pre_slit"
    POST_SLIT = "post_slit"


class Estimator(Enum):
    ANALYTIC = "analytic"
    MONTE_CARLO = "monte_carlo"
    BOTH = "both"


class OracleMode(Enum):
    """Amplitude factors of the two-slit wave oracle"""
    IDEALIZED = "idealized"
    INVERSE_R = "inverse_r"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class Event:
    """Spacetime event in natural units (c = 1, Planck's constant 2π)."""
    t: float
    x: float
    y: float = 0.0

    def __post_init__(self):
        _require(
            all(math.isfinite(v) for v in (self.t, self.x, self.y)),
            f"Event coordinates must be finite, got ({self.t}, {self.x}, {self.y})"
        )

    def spatial_distance(self, other: "Event") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)


@dataclass(frozen=True)
class Segment:
    """Geodesic line between two events."""
    start: Event
    end: Event

    @property
    def length(self) -> float:
        return self.start.spatial_distance(self.end)

    @property
    def elapsed(self) -> float:
        return self.end.t - self.start.t

    @property
    def midpoint_x(self) -> float:
        return 0.5 * (self.start.x + self.end.x)


@dataclass(frozen=True)
class Path:
    """
    Piecewise-geodesic trajectory.

    A path is either monotonic (t strictly increasing) or a correlated pair:
    t strictly increasing up to a single peak event and strictly decreasing
    after it. The pair form is what decomposes into two monotonic paths.
    """
    events: Tuple[Event, ...]
    monotonic: bool = field(init=False)
    peak_index: int = field(init=False, repr=False)

    def __post_init__(self):
        events = tuple(self.events)
        object.__setattr__(self, "events", events)
        if len(events) < 2:
            raise PathError("Path needs at least two events")
        for a, b in zip(events, events[1:]):
            if a == b:
                raise PathError(f"Consecutive events must be distinct, got {a} twice")

        times = [e.t for e in events]
        peak = max(range(len(times)), key=lambda i: times[i])
        rising = all(t1 > t0 for t0, t1 in zip(times[:peak], times[1:peak + 1]))
        falling = all(t1 < t0 for t0, t1 in zip(times[peak:], times[peak + 1:]))
        if not (rising and falling) or peak == 0:
            raise PathError("Path time must rise strictly, optionally followed by a single strict descent")

        object.__setattr__(self, "peak_index", peak)
        object.__setattr__(self, "monotonic", peak == len(events) - 1)

    def segments(self) -> List[Segment]:
        return [Segment(a, b) for a, b in zip(self.events, self.events[1:])]

    @property
    def terminal(self) -> Event:
        """Last event of a monotonic path, the shared peak event of a pair."""
        return self.events[self.peak_index]

    @property
    def start(self) -> Event:
        return self.events[0]


@dataclass(frozen=True)
class ParticleParams:
    """Particle of non-zero rest mass with momentum magnitude p."""
    mass: float
    momentum: float

    def __post_init__(self):
        _require(self.mass > 0, f"mass must be > 0, got {self.mass}")
        _require(self.momentum > 0, f"momentum must be > 0, got {self.momentum}")

    @classmethod
    def from_kinetic_energy(cls, mass: float, kinetic_energy: float) -> "ParticleParams":
        """Momentum from the non-relativistic kinetic energy p²/2m."""
        return cls(mass=mass, momentum=math.sqrt(2.0 * mass * kinetic_energy))

    @property
    def wavelength(self) -> float:
        return TWO_PI / self.momentum

    @property
    def energy(self) -> float:
        return math.hypot(self.mass, self.momentum)

    @property
    def speed(self) -> float:
        """Relativistic speed p/E, always below 1."""
        return self.momentum / self.energy

    @property
    def kinetic_energy(self) -> float:
        """Non-relativistic kinetic energy p²/2m."""
        return self.momentum ** 2 / (2.0 * self.mass)


@dataclass(frozen=True)
class PotentialSpec:
    """Free space or a rectangular barrier of height V on [x_lo, x_hi]."""
    kind: PotentialKind = PotentialKind.FREE
    V: float = 0.0
    x_lo: float = 0.0
    x_hi: float = 1.0

    def __post_init__(self):
        _require(self.V >= 0, f"barrier height must be >= 0, got {self.V}")
        if self.kind is PotentialKind.BARRIER:
            _require(self.x_lo < self.x_hi, f"barrier needs x_lo < x_hi, got [{self.x_lo}, {self.x_hi}]")

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo

    def value_at(self, x: float) -> float:
        if self.kind is PotentialKind.BARRIER and self.x_lo <= x <= self.x_hi:
            return self.V
        return 0.0

    def values_at(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind is not PotentialKind.BARRIER:
            return np.zeros_like(x)
        return np.where((x >= self.x_lo) & (x <= self.x_hi), self.V, 0.0)


@dataclass(frozen=True)
class PhaseState:
    """Unit-magnitude state κ = exp(i·angle), angle kept in [0, 2π)."""
    angle: float = 0.0

    def __post_init__(self):
        _require(math.isfinite(self.angle), f"phase angle must be finite, got {self.angle}")
        wrapped = self.angle % TWO_PI
        # x % 2π can round up to 2π itself for tiny negative x
        if wrapped >= TWO_PI:
            wrapped = 0.0
        object.__setattr__(self, "angle", wrapped)

    @property
    def value(self) -> complex:
        return complex(math.cos(self.angle), math.sin(self.angle))

    def compose(self, other: "PhaseState") -> "PhaseState":
        return PhaseState(self.angle + other.angle)

    def inverse(self) -> "PhaseState":
        return PhaseState(-self.angle)


@dataclass(frozen=True)
class PhaseResidual:
    """Distance omega of a phase to its nearest multiple 2π·n_nearest."""
    omega: float
    n_nearest: int

    def __post_init__(self):
        _require(0.0 <= self.omega <= math.pi, f"omega must lie in [0, π], got {self.omega}")


@dataclass(frozen=True)
class DensityParams:
    """Constants of the neighbourhood density 1/(a·ξ̄² + b·ξ̄·√ω)."""
    a: float = 1.0
    b: float = 1.0
    xi_bar: float = 0.1

    def __post_init__(self):
        _require(self.a > 0, f"density constant a must be > 0, got {self.a}")
        _require(self.b > 0, f"density constant b must be > 0, got {self.b}")
        _require(self.xi_bar > 0, f"xi_bar must be > 0, got {self.xi_bar}")

    @classmethod
    def for_particle(cls, particle: ParticleParams, a: float = 1.0, b: float = 1.0) -> "DensityParams":
        """Defaults with the smoothing scale ξ̄ = λ/10."""
        return cls(a=a, b=b, xi_bar=particle.wavelength / 10.0)


@dataclass(frozen=True)
class SamplerConfig:
    """Monte Carlo sampling parameters."""
    n_paths: int = 10000
    n_joints: int = 2
    perturb_scale: float = 0.05
    accept_tol: float = math.pi
    projection: Projection = Projection.BAND_FILTER
    max_bisection_iters: int = 200
    action_mode: ActionMode = ActionMode.RELATIVISTIC
    workers: int = 1

    def __post_init__(self):
        _require(self.n_paths >= 1, f"n_paths must be >= 1, got {self.n_paths}")
        _require(0 <= self.n_joints <= 64, f"n_joints must lie in [0, 64], got {self.n_joints}")
        _require(self.perturb_scale > 0, f"perturb_scale must be > 0, got {self.perturb_scale}")
        _require(0 < self.accept_tol <= math.pi, f"accept_tol must lie in (0, π], got {self.accept_tol}")
        _require(self.max_bisection_iters >= 1, f"max_bisection_iters must be >= 1, got {self.max_bisection_iters}")
        _require(self.workers >= 1, f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class SeedSpec:
    """Master seed and the number of independent sampling streams."""
    master_seed: int = 0
    stream_count: int = 4

    def __post_init__(self):
        _require(0 <= self.master_seed < 2 ** 64, f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        _require(self.stream_count >= 1, f"stream_count must be >= 1, got {self.stream_count}")

    def spawn(self) -> List[np.random.SeedSequence]:
        return np.random.SeedSequence(self.master_seed).spawn(self.stream_count)

    def generators(self) -> List[np.random.Generator]:
        return [np.random.default_rng(seq) for seq in self.spawn()]


@dataclass(frozen=True)
class ScreenSpec:
    """Binned screen at distance L from the slit plane."""
    n_bins: int
    distance: float
    x_min: float = -50.0
    x_max: float = 50.0
    axis: str = "x"

    def __post_init__(self):
        _require(self.n_bins >= 2, f"screen needs at least 2 bins, got {self.n_bins}")
        _require(self.x_min < self.x_max, f"screen needs x_min < x_max, got [{self.x_min}, {self.x_max}]")
        _require(self.distance > 0, f"screen distance must be > 0, got {self.distance}")
        _require(self.axis in ("x", "y"), f"screen axis must be 'x' or 'y', got {self.axis!r}")

    @property
    def bin_width(self) -> float:
        return (self.x_max - self.x_min) / self.n_bins

    @property
    def bin_edges(self) -> np.ndarray:
        return self.x_min + self.bin_width * np.arange(self.n_bins + 1)

    @property
    def bin_centers(self) -> np.ndarray:
        return self.x_min + self.bin_width * (np.arange(self.n_bins) + 0.5)

    def at_distance(self, distance: float) -> "ScreenSpec":
        return ScreenSpec(self.n_bins, distance, self.x_min, self.x_max, self.axis)


@dataclass(frozen=True)
class IntrusionSpec:
    """Watching-photon intrusion between the source and the screen."""
    mode: IntrusionMode = IntrusionMode.NONE
    photon_momentum: float = 0.0
    fixed_delta_kappa: float = 0.0
    stage: IntrusionStage = IntrusionStage.PRE_SLIT

    def __post_init__(self):
        _require(self.photon_momentum >= 0, f"photon momentum q must be >= 0, got {self.photon_momentum}")
        _require(math.isfinite(self.fixed_delta_kappa), "fixed_delta_kappa must be finite")

    @property
    def delta_kappa(self) -> float:
        """Deterministic δκ; zero unless the mode is fixed_phase."""
        if self.mode is IntrusionMode.FIXED_PHASE:
            return self.fixed_delta_kappa
        return 0.0

    def spread(self, slit_separation: float) -> float:
        """Scale s of the intrusion: q·d for random kicks, |wrapped δκ| for a fixed phase."""
        if self.mode is IntrusionMode.RANDOM_KICK:
            return self.photon_momentum * slit_separation
        if self.mode is IntrusionMode.FIXED_PHASE:
            wrapped = math.remainder(self.fixed_delta_kappa, TWO_PI)
            return abs(wrapped)
        return 0.0


@dataclass(frozen=True)
class EprSpec:
    """Actions of the correlated pair and the intrusion measure."""
    S_rho: float = 0.0
    S_rho_prime: float = 0.0
    delta_S: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Full parameterization of one experiment run."""
    particle: ParticleParams
    slit_separation: float
    screen: ScreenSpec
    experiment: str = "double_slit"
    intrusion: IntrusionSpec = IntrusionSpec()
    flux: float = 0.0
    pot: PotentialSpec = PotentialSpec()
    sampler: SamplerConfig = SamplerConfig()
    seeds: SeedSpec = SeedSpec()
    estimator: Estimator = Estimator.ANALYTIC
    density: Optional[DensityParams] = None
    slit_width: float = 0.5
    divergence: float = 0.5
    pair_weight: float = 1.0
    barrier_start: float = -5.0
    sweep_distances: Tuple[float, ...] = ()
    oracle_mode: OracleMode = OracleMode.IDEALIZED
    epr: EprSpec = EprSpec()

    def __post_init__(self):
        _require(self.slit_separation > 0, f"slit separation d must be > 0, got {self.slit_separation}")
        _require(
            self.slit_separation < self.screen.x_max - self.screen.x_min,
            "slit separation d must be smaller than the screen range"
        )
        _require(math.isfinite(self.flux), "flux F must be finite")
        _require(self.slit_width > 0, f"slit_width must be > 0, got {self.slit_width}")
        _require(self.divergence > 0, f"divergence must be > 0, got {self.divergence}")
        _require(self.pair_weight > 0, f"pair_weight must be > 0, got {self.pair_weight}")
        object.__setattr__(self, "sweep_distances", tuple(float(d) for d in self.sweep_distances))
        if self.density is None:
            object.__setattr__(self, "density", DensityParams.for_particle(self.particle))

    @property
    def distance(self) -> float:
        return self.screen.distance


@dataclass
class DensityProfile:
    """Binned screen density with gauge and optional oracle columns."""
    bin_centers: np.ndarray
    gauge_density: np.ndarray
    oracle_density: Optional[np.ndarray] = None
    overflow: int = 0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.bin_centers = np.asarray(self.bin_centers, dtype=float)
        self.gauge_density = np.asarray(self.gauge_density, dtype=float)
        if self.bin_centers.shape != self.gauge_density.shape:
            raise ValueError("bin_centers and gauge_density lengths differ")
        if self.oracle_density is not None:
            self.oracle_density = np.asarray(self.oracle_density, dtype=float)
            if self.oracle_density.shape != self.bin_centers.shape:
                raise ValueError("bin_centers and oracle_density lengths differ")

    @property
    def bin_width(self) -> float:
        return float(self.bin_centers[1] - self.bin_centers[0])

    @property
    def empty(self) -> bool:
        return not np.any(self.gauge_density)

    def total(self) -> float:
        return float(np.sum(self.gauge_density) * self.bin_width)


@dataclass(frozen=True)
class TunnelingReport:
    """Outcome of a barrier scan."""
    n_attempts: int
    n_transmitted: int
    emergent_speeds: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "emergent_speeds", tuple(self.emergent_speeds))
        _require(0 <= self.n_transmitted <= self.n_attempts, "n_transmitted must lie in [0, n_attempts]")
        _require(all(v <= 1.0 for v in self.emergent_speeds), "emergent speeds cannot exceed 1")

    @property
    def transmitted_fraction(self) -> float:
        if self.n_attempts == 0:
            return 0.0
        return self.n_transmitted / self.n_attempts


@dataclass
class WaveField:
    """Complex amplitudes on the uniform grid x_min + dx·k."""
    values: np.ndarray
    dx: float
    t: float = 0.0
    x_min: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        _require(self.dx > 0, f"grid spacing must be > 0, got {self.dx}")

    @property
    def grid(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.values.size)


@dataclass
class MadelungFields:
    """Density σ and phase S of ψ = √σ·exp(iS); S is NaN outside the mask."""
    sigma: np.ndarray
    S_phase: np.ndarray
    mask: np.ndarray
    dx: float
    t: float = 0.0
    x_min: float = 0.0

    @property
    def grid(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.sigma.size)


@dataclass(frozen=True)
class LatticeSpec:
    """Space-time lattice for exhaustive sum-over-histories."""
    n_time_steps: int
    n_space_points: int
    dt: float
    dx: float
    mass: float = 1.0
    potential: Tuple[float, ...] = ()
    start_index: Optional[int] = None

    def __post_init__(self):
        _require(self.n_time_steps >= 1, f"n_time_steps must be >= 1, got {self.n_time_steps}")
        _require(self.n_space_points >= 1, f"n_space_points must be >= 1, got {self.n_space_points}")
        _require(self.dt > 0 and self.dx > 0, "lattice spacings must be positive")
        _require(self.mass > 0, f"mass must be > 0, got {self.mass}")
        potential = tuple(float(v) for v in self.potential) or (0.0,) * self.n_space_points
        _require(len(potential) == self.n_space_points, "potential grid must have n_space_points entries")
        object.__setattr__(self, "potential", potential)
        start = self.n_space_points // 2 if self.start_index is None else self.start_index
        _require(0 <= start < self.n_space_points, f"start_index out of range: {start}")
        object.__setattr__(self, "start_index", start)

    @property
    def n_paths(self) -> int:
        return self.n_space_points ** self.n_time_steps


@dataclass
class RunManifest:
    """Record of one orchestrated run."""
    experiment: str
    config_echo: str
    master_seed: int
    tool_version: str
    wall_time: float
    files: List[str] = field(default_factory=list)
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "config_echo": self.config_echo,
            "master_seed": self.master_seed,
            "tool_version": self.tool_version,
            "wall_time": self.wall_time,
            "files": list(self.files),
            "extras": dict(self.extras),
        }


def wrap_angle(angle: float) -> float:
    """Angle reduced to [0, 2π)."""
    return PhaseState(angle).angle
