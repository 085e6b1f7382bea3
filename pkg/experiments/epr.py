"""
Correlated-pair (EPR) phase algebra
"""

import logging
from typing import Tuple

from core.gauge import pair_is_physical
from core.models import wrap_angle

logger = logging.getLogger(__name__)


def epr_compensation(S_rho: float, S_rho_prime: float, delta_S: float) -> Tuple[bool, float]:
    """
    Physicality of an undisturbed pair and the factor a disturbance demands.

    Args:
        S_rho: Action of the path to one detector
        S_rho_prime: Action of the correlated partner path
        delta_S: Action picked up from the intrusion at one end

    Returns:
        (whether the undisturbed pair is physical, angle of the factor
        exp(i·δS) the partner path has to supply, in [0, 2π))
    """
    undisturbed = pair_is_physical(S_rho, S_rho_prime, 0.0)
    factor_angle = wrap_angle(delta_S)
    logger.debug(f"EPR pair: physical={undisturbed}, compensating angle={factor_angle!r}")
    return undisturbed, factor_angle


def disturbed_pair_is_physical(S_rho: float, S_rho_prime: float, delta_S: float, partner_shift: float = 0.0) -> bool:
    """Pair condition after the intrusion adds delta_S and the partner adds partner_shift."""
    return pair_is_physical(S_rho + delta_S, S_rho_prime + partner_shift, 0.0)
