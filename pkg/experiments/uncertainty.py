"""
Uncertainty product from the fringe spacing
"""

import logging
import math

import numpy as np

from core.errors import InsufficientFringesError
from core.models import DensityProfile, ExperimentConfig
from experiments.double_slit import detect_fringes, path_difference

logger = logging.getLogger(__name__)

MIN_FRINGES = 3


def uncertainty_product(profile: DensityProfile, cfg: ExperimentConfig) -> float:
    """
    δp·δx from the fringes of a double-slit profile.

    The spacing δr is the mean step of the exact path difference between
    neighbouring maxima; δp = p·δr/d and δx = d/2.

    Raises:
        InsufficientFringesError: If fewer than three maxima are resolved
    """
    maxima = detect_fringes(profile)
    if len(maxima) < MIN_FRINGES:
        raise InsufficientFringesError(f"Need at least {MIN_FRINGES} fringes, found {len(maxima)}")

    differences = np.sort(path_difference(profile.bin_centers[maxima], cfg))
    delta_r = float(np.mean(np.diff(differences)))
    delta_p = cfg.particle.momentum * delta_r / cfg.slit_separation
    delta_x = 0.5 * cfg.slit_separation
    product = delta_p * delta_x
    logger.info(f"Uncertainty product from {len(maxima)} fringes: {product:.6g} (π = {math.pi:.6g})")
    return product


def analytic_uncertainty_product(cfg: ExperimentConfig) -> float:
    """Closed form with δr = 2π/p: δp·δx = (2π/d)·(d/2)."""
    delta_p = 2.0 * math.pi / cfg.slit_separation
    delta_x = 0.5 * cfg.slit_separation
    return delta_p * delta_x
