"""
Standard quantum-mechanics reference results
Two-slit wave intensity, split-step Schrödinger evolution and the Madelung decomposition
"""

import logging
import math
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from core.errors import EmptyRegionError, WaveInstabilityError
from core.models import ExperimentConfig, MadelungFields, OracleMode, WaveField

logger = logging.getLogger(__name__)

SIGMA_THRESHOLD = 1e-10

ArrayLike = Union[float, np.ndarray]


def arm_lengths(x: ArrayLike, cfg: ExperimentConfig) -> Tuple[ArrayLike, ArrayLike]:
    """Distances from the slits at (∓d/2, 0) to the screen point (x, L)."""
    half = 0.5 * cfg.slit_separation
    L = cfg.distance
    return np.hypot(np.add(x, half), L), np.hypot(np.subtract(x, half), L)


def two_slit_wave_intensity(x: ArrayLike, cfg: ExperimentConfig) -> ArrayLike:
    """
    Intensity of the two-slit wave at screen coordinate x.

    The idealized mode superposes unit amplitudes and has exact zeros; the
    inverse_r mode weights each arm by L/r.
    """
    r1, r2 = arm_lengths(x, cfg)
    p = cfg.particle.momentum
    if cfg.oracle_mode is OracleMode.INVERSE_R:
        L = cfg.distance
        amplitude = np.exp(1j * p * r1) * (L / r1) + np.exp(1j * p * r2) * (L / r2)
    else:
        amplitude = np.exp(1j * p * r1) + np.exp(1j * p * r2)
    intensity = np.abs(amplitude) ** 2
    return float(intensity) if np.ndim(intensity) == 0 else intensity


def solve_path_difference(target: float, cfg: ExperimentConfig) -> Optional[float]:
    """
    Screen coordinate where r1 - r2 equals target, or None if off the screen.

    r1 - r2 increases monotonically with x, so a sign change over the screen
    range brackets the unique solution.
    """
    def mismatch(x: float) -> float:
        r1, r2 = arm_lengths(x, cfg)
        return float(r1 - r2) - target

    lo, hi = cfg.screen.x_min, cfg.screen.x_max
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_lo == 0.0:
        return lo
    if f_lo * f_hi > 0:
        return None
    return brentq(mismatch, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=200)


def dark_fringe_positions(cfg: ExperimentConfig, n_range: Iterable[int]) -> List[float]:
    """Exact zeros of the idealized intensity, r1 - r2 = (n + ½)λ, that lie on the screen."""
    wavelength = cfg.particle.wavelength
    positions = []
    for n in n_range:
        x = solve_path_difference((n + 0.5) * wavelength, cfg)
        if x is not None:
            positions.append(x)
    return sorted(positions)


def oracle_profile(cfg: ExperimentConfig) -> np.ndarray:
    """Wave intensity at the screen bin centres normalized to unit area."""
    intensity = np.asarray(two_slit_wave_intensity(cfg.screen.bin_centers, cfg))
    total = float(np.sum(intensity)) * cfg.screen.bin_width
    return intensity / total if total > 0 else intensity


def wave_norm(field: WaveField) -> float:
    return float(np.sum(np.abs(field.values) ** 2) * field.dx)


def evolve_wave(
    field: WaveField,
    dt: float,
    n_steps: int,
    potential: Optional[np.ndarray] = None,
    mass: float = 1.0,
) -> WaveField:
    """
    Strang split-step Fourier evolution on a periodic grid.

    Args:
        field: Initial wave field
        dt: Time step
        n_steps: Number of steps
        potential: Potential on the field grid (zero if omitted)
        mass: Particle mass

    Returns:
        New WaveField at time field.t + n_steps·dt

    Raises:
        WaveInstabilityError: If one step advances the highest grid mode or
            the potential phase by more than π
    """
    n = field.values.size
    V = np.zeros(n) if potential is None else np.asarray(potential, dtype=float)
    if V.shape != (n,):
        raise ValueError(f"potential grid has {V.size} points, field has {n}")
    if dt <= 0 or n_steps < 0:
        raise ValueError("evolve_wave needs dt > 0 and n_steps >= 0")

    kinetic_phase = dt * (math.pi / field.dx) ** 2 / (2.0 * mass)
    potential_phase = float(np.max(np.abs(V))) * dt if n else 0.0
    if kinetic_phase > math.pi or potential_phase > math.pi:
        raise WaveInstabilityError(
            f"Step too large: kinetic phase {kinetic_phase:.3g}, potential phase {potential_phase:.3g} (limit π)"
        )

    k = 2.0 * math.pi * np.fft.fftfreq(n, d=field.dx)
    half_potential = np.exp(-0.5j * V * dt)
    kinetic = np.exp(-0.5j * k ** 2 * dt / mass)

    psi = field.values.copy()
    for _ in range(n_steps):
        psi = half_potential * psi
        psi = np.fft.ifft(kinetic * np.fft.fft(psi))
        psi = half_potential * psi

    return WaveField(values=psi, dx=field.dx, t=field.t + n_steps * dt, x_min=field.x_min)


def _grid(n_points: int, dx: float, x_min: float) -> np.ndarray:
    return x_min + dx * np.arange(n_points)


def gaussian_packet(
    n_points: int,
    dx: float,
    x_min: float,
    center: float,
    width: float,
    momentum: float = 0.0,
    mass: float = 1.0,
    t: float = 0.0,
) -> WaveField:
    """
    Closed-form free Gaussian packet at time t.

    At t = 0 the packet is (2πσ²)^(-1/4)·exp(-(x - x0)²/(4σ²) + i·p·x); its
    centre moves at p/m and its position variance grows as σ²·(1 + τ²) with
    τ = t/(2mσ²).
    """
    x = _grid(n_points, dx, x_min)
    tau = t / (2.0 * mass * width ** 2)
    spread = 1.0 + 1j * tau
    shifted = x - center - momentum * t / mass
    values = (
        (2.0 * math.pi * width ** 2) ** -0.25 / np.sqrt(spread)
        * np.exp(-shifted ** 2 / (4.0 * width ** 2 * spread) + 1j * momentum * (x - momentum * t / (2.0 * mass)))
    )
    return WaveField(values=values, dx=dx, t=t, x_min=x_min)


def free_packet_variance(width: float, t: float, mass: float = 1.0) -> float:
    tau = t / (2.0 * mass * width ** 2)
    return width ** 2 * (1.0 + tau ** 2)


def harmonic_potential(n_points: int, dx: float, x_min: float, mass: float = 1.0, omega: float = 1.0) -> np.ndarray:
    x = _grid(n_points, dx, x_min)
    return 0.5 * mass * omega ** 2 * x ** 2


def harmonic_ground_state(
    n_points: int,
    dx: float,
    x_min: float,
    mass: float = 1.0,
    omega: float = 1.0,
    t: float = 0.0,
) -> WaveField:
    """Oscillator ground state (mω/π)^(1/4)·exp(-mωx²/2 - iωt/2)."""
    x = _grid(n_points, dx, x_min)
    values = (mass * omega / math.pi) ** 0.25 * np.exp(-0.5 * mass * omega * x ** 2 - 0.5j * omega * t)
    return WaveField(values=values, dx=dx, t=t, x_min=x_min)


def coherent_state(
    n_points: int,
    dx: float,
    x_min: float,
    displacement: float,
    mass: float = 1.0,
    omega: float = 1.0,
    t: float = 0.0,
) -> WaveField:
    """Ground state displaced by `displacement` at t = 0, oscillating rigidly."""
    x = _grid(n_points, dx, x_min)
    x_c = displacement * math.cos(omega * t)
    p_c = -mass * omega * displacement * math.sin(omega * t)
    exponent = -0.5 * mass * omega * (x - x_c) ** 2 + 1j * p_c * (x - 0.5 * x_c) - 0.5j * omega * t
    values = (mass * omega / math.pi) ** 0.25 * np.exp(exponent)
    return WaveField(values=values, dx=dx, t=t, x_min=x_min)


def madelung_decompose(field: WaveField) -> MadelungFields:
    """
    Split ψ into density σ = |ψ|² and phase S.

    The phase is unwrapped over the points where σ exceeds 1e-10 of its
    maximum and left as NaN elsewhere.
    """
    sigma = np.abs(field.values) ** 2
    peak = float(np.max(sigma)) if sigma.size else 0.0
    mask = sigma > SIGMA_THRESHOLD * peak if peak > 0 else np.zeros(sigma.shape, dtype=bool)
    phase = np.full(sigma.shape, np.nan)
    if np.any(mask):
        phase[mask] = np.unwrap(np.angle(field.values[mask]))
    return MadelungFields(sigma=sigma, S_phase=phase, mask=mask, dx=field.dx, t=field.t, x_min=field.x_min)


def _first_difference(f: np.ndarray, dx: float) -> np.ndarray:
    d = np.full(f.shape, np.nan)
    d[1:-1] = (f[2:] - f[:-2]) / (2.0 * dx)
    return d


def _second_difference(f: np.ndarray, dx: float) -> np.ndarray:
    d = np.full(f.shape, np.nan)
    d[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / dx ** 2
    return d


def quantum_potential(fields: MadelungFields, mass: float = 1.0) -> np.ndarray:
    """-(√σ)''/(2m√σ) on the masked region, NaN elsewhere."""
    root = np.where(fields.mask, np.sqrt(fields.sigma), np.nan)
    return -_second_difference(root, fields.dx) / (2.0 * mass * root)


def madelung_residuals(
    before: MadelungFields,
    after: MadelungFields,
    mass: float = 1.0,
    potential: Optional[np.ndarray] = None,
    include_quantum_potential: bool = True,
) -> Tuple[float, float]:
    """
    Max-norm residuals of the continuity and quantum Hamilton-Jacobi equations.

    Time derivatives are forward differences between the two snapshots;
    spatial terms are averaged over both. Only points whose stencil lies
    entirely in both masks contribute.

    Args:
        before: Fields at time t
        after: Fields at time t + dt on the same grid
        mass: Particle mass
        potential: Potential on the grid (zero if omitted)
        include_quantum_potential: Drop the quantum potential when False

    Returns:
        (continuity residual, Hamilton-Jacobi residual)

    Raises:
        EmptyRegionError: If no grid point qualifies
    """
    dt = after.t - before.t
    if dt <= 0:
        raise ValueError(f"Snapshots must be ordered in time, got dt = {dt}")
    if before.sigma.shape != after.sigma.shape or before.dx != after.dx:
        raise ValueError("Snapshots must share their grid")
    V = np.zeros(before.sigma.shape) if potential is None else np.asarray(potential, dtype=float)

    mask = before.mask & after.mask
    S0 = np.where(mask, before.S_phase, np.nan)
    S1 = np.where(mask, after.S_phase, np.nan)
    if not np.any(mask):
        raise EmptyRegionError("No grid points above the density threshold")
    # the two unwraps may start on different branches
    S1 = S1 - 2.0 * math.pi * np.round(np.nanmedian(S1 - S0) / (2.0 * math.pi))

    dx = before.dx
    sigma0 = np.where(mask, before.sigma, np.nan)
    sigma1 = np.where(mask, after.sigma, np.nan)
    grad0 = _first_difference(S0, dx)
    grad1 = _first_difference(S1, dx)

    flux0 = _first_difference(sigma0 * grad0 / mass, dx)
    flux1 = _first_difference(sigma1 * grad1 / mass, dx)
    continuity = (sigma1 - sigma0) / dt + 0.5 * (flux0 + flux1)

    energy0 = grad0 ** 2 / (2.0 * mass)
    energy1 = grad1 ** 2 / (2.0 * mass)
    if include_quantum_potential:
        masked0 = MadelungFields(before.sigma, S0, mask, dx, before.t, before.x_min)
        masked1 = MadelungFields(after.sigma, S1, mask, dx, after.t, after.x_min)
        energy0 = energy0 + quantum_potential(masked0, mass)
        energy1 = energy1 + quantum_potential(masked1, mass)
    hamilton_jacobi = (S1 - S0) / dt + 0.5 * (energy0 + energy1) + V

    if not (np.any(np.isfinite(continuity)) and np.any(np.isfinite(hamilton_jacobi))):
        raise EmptyRegionError("Density region too narrow for the difference stencils")
    return float(np.nanmax(np.abs(continuity))), float(np.nanmax(np.abs(hamilton_jacobi)))
