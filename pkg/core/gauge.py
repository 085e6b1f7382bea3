"""
Gauge-mechanical physicality predicates and the path neighbourhood density

A path from A to B is physical when κ(B)·exp(iS)·κ⁻¹(A) = 1, i.e. when its
action sits on a multiple of 2π once the state difference is absorbed.
"""

import logging
import math
from typing import List, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import nnls

from core.models import TWO_PI, DensityParams, ParticleParams, PhaseResidual, PhaseState

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9


def phase_residual(S: float, delta: float = 0.0) -> PhaseResidual:
    """
    Distance of S - delta to the nearest multiple of 2π.

    Args:
        S: Action
        delta: Target phase

    Returns:
        PhaseResidual with omega in [0, π]; a tie at π goes to the smaller n
    """
    r = S - delta
    n = math.ceil(r / TWO_PI - 0.5)
    omega = min(abs(r - TWO_PI * n), math.pi)
    return PhaseResidual(omega=omega, n_nearest=int(n))


def phase_residuals(S: np.ndarray, delta: Union[float, np.ndarray] = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized phase_residual returning (omega, n_nearest) arrays."""
    r = np.asarray(S, dtype=float) - delta
    n = np.ceil(r / TWO_PI - 0.5)
    omega = np.minimum(np.abs(r - TWO_PI * n), math.pi)
    return omega, n.astype(np.int64)


def is_physical(S: float, kappa_A: PhaseState, kappa_B: PhaseState, tol: float = DEFAULT_TOLERANCE) -> bool:
    """True when the state difference angle(κ_B) - angle(κ_A) absorbs S modulo 2π."""
    if tol < 0:
        raise ValueError(f"tolerance must be >= 0, got {tol}")
    return phase_residual(S, kappa_B.angle - kappa_A.angle).omega <= tol


def pair_is_physical(
    S_rho: float,
    S_rho_prime: float,
    delta_kappa_angle: float = 0.0,
    tol: float = DEFAULT_TOLERANCE,
) -> bool:
    """
    Physicality of a correlated pair of monotonic paths.

    Args:
        S_rho: Action of the path from A
        S_rho_prime: Action of the path from A′
        delta_kappa_angle: angle(κ(A′)) - angle(κ(A))
        tol: Residual tolerance

    Returns:
        True iff the action difference matches delta_kappa_angle modulo 2π
    """
    if tol < 0:
        raise ValueError(f"tolerance must be >= 0, got {tol}")
    return phase_residual(S_rho - S_rho_prime, delta_kappa_angle).omega <= tol


def quantized_radii(particle: ParticleParams, n_max: int) -> List[float]:
    """Lengths 2πn/p, n = 1..n_max, reachable by free monotonic physical paths."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    return [TWO_PI * n / particle.momentum for n in range(1, n_max + 1)]


def _omega_value(omega: Union[PhaseResidual, float]) -> float:
    return omega.omega if isinstance(omega, PhaseResidual) else float(omega)


def neighborhood_density(omega: Union[PhaseResidual, float], params: DensityParams) -> float:
    """Relative density 1/(a·ξ̄² + b·ξ̄·√ω) of paths with residual ω."""
    w = _omega_value(omega)
    return 1.0 / (params.a * params.xi_bar ** 2 + params.b * params.xi_bar * math.sqrt(w))


def neighborhood_densities(omega: np.ndarray, params: DensityParams) -> np.ndarray:
    omega = np.asarray(omega, dtype=float)
    return 1.0 / (params.a * params.xi_bar ** 2 + params.b * params.xi_bar * np.sqrt(omega))


def density_integral(omega: Union[float, np.ndarray], params: DensityParams) -> Union[float, np.ndarray]:
    """
    Closed-form ∫₀^ω of the neighbourhood density.

    With A = a·ξ̄² and B = b·ξ̄ the antiderivative is
    (2/B)·[√ω - (A/B)·ln(1 + B√ω/A)].
    """
    A = params.a * params.xi_bar ** 2
    B = params.b * params.xi_bar
    root = np.sqrt(np.asarray(omega, dtype=float))
    value = (2.0 / B) * (root - (A / B) * np.log1p(B * root / A))
    return float(value) if np.ndim(value) == 0 else value


def mean_density(params: DensityParams) -> float:
    """Average of the neighbourhood density over one period of the phase."""
    return density_integral(math.pi, params) / math.pi


def phase_cumulative(phase: np.ndarray, params: DensityParams) -> np.ndarray:
    """
    Antiderivative of the density of ω(phase) along the unwrapped phase axis.

    The density is 2π-periodic and even in the phase, so each full period
    contributes twice the integral over [0, π].
    """
    phase = np.asarray(phase, dtype=float)
    k = np.floor((phase + math.pi) / TWO_PI)
    u = phase - TWO_PI * k
    per_period = 2.0 * density_integral(math.pi, params)
    return k * per_period + np.sign(u) * density_integral(np.abs(u), params)


def bin_averaged_density(lo_phase: np.ndarray, hi_phase: np.ndarray, params: DensityParams) -> np.ndarray:
    """
    Exact average of the density over phase intervals [lo, hi].

    Intervals narrower than 1e-12 fall back to the midpoint value.
    """
    lo = np.asarray(lo_phase, dtype=float)
    hi = np.asarray(hi_phase, dtype=float)
    span = hi - lo
    narrow = np.abs(span) < 1e-12
    safe = np.where(narrow, 1.0, span)
    averaged = (phase_cumulative(hi, params) - phase_cumulative(lo, params)) / safe
    midpoint, _ = phase_residuals(0.5 * (lo + hi))
    return np.where(narrow, neighborhood_densities(midpoint, params), averaged)


def calibrate_density_params(
    omegas: Sequence[float],
    counts: Sequence[float],
    xi_bar: float,
) -> DensityParams:
    """
    Fit (a, b) by non-negative least squares of 1/count on (ξ̄², ξ̄·√ω).

    Rows are weighted by count^1.5, the inverse standard deviation of
    1/count under Poisson counting.

    Args:
        omegas: Residual bin centres
        counts: Path counts (or any quantity proportional to them) per bin
        xi_bar: Neighbourhood scale held fixed during the fit

    Returns:
        DensityParams with the fitted constants

    Raises:
        ValueError: If fewer than two bins have positive counts
    """
    omegas = np.asarray(omegas, dtype=float)
    counts = np.asarray(counts, dtype=float)
    usable = counts > 0
    if np.count_nonzero(usable) < 2:
        raise ValueError("Calibration needs at least two bins with positive counts")

    design = np.column_stack([
        np.full(np.count_nonzero(usable), xi_bar ** 2),
        xi_bar * np.sqrt(omegas[usable]),
    ])
    target = 1.0 / counts[usable]
    weights = counts[usable] ** 1.5
    (a, b), residual = nnls(design * weights[:, None], target * weights)
    logger.debug(f"Density calibration: a={a!r}, b={b!r}, residual={residual!r}")

    floor = np.finfo(float).eps
    if a <= 0 or b <= 0:
        logger.warning(f"Calibration hit the positivity bound (a={a}, b={b}); clamping to {floor}")
    return DensityParams(a=max(a, floor), b=max(b, floor), xi_bar=xi_bar)
