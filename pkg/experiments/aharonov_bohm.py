"""
Aharonov-Bohm experiment driver
"""

import logging

from core.gauge import phase_residual
from core.models import DensityProfile, ExperimentConfig, wrap_angle
from experiments.double_slit import slit_profile

logger = logging.getLogger(__name__)

FLUX_TOLERANCE = 1e-9


def aharonov_bohm(cfg: ExperimentConfig) -> DensityProfile:
    """
    Two-arm profile with the enclosed flux F entering the pair residual as a phase.

    The arms A→C→B and A→D→B run through the slit points C and D of the
    double-slit geometry with the source on the axis, so only the free
    action and F contribute. F is reduced modulo 2π first; fluxes that
    differ by a multiple of 2π therefore give identical profiles.
    """
    flux_phase = wrap_angle(cfg.flux)
    logger.info(f"Aharonov-Bohm run: F={cfg.flux!r} (reduced {flux_phase!r})")
    profile = slit_profile(cfg, extra_phase=flux_phase)
    profile.metadata["flux"] = cfg.flux
    profile.metadata["flux_phase"] = flux_phase
    return profile


def gauge_equivalent(F1: float, F2: float) -> bool:
    """True when two fluxes assign the same gauge group element."""
    return phase_residual(F1 - F2, 0.0).omega <= FLUX_TOLERANCE
