"""
Oracle package: standard quantum-mechanics reference computations
"""

from oracle.wave import (
    two_slit_wave_intensity, dark_fringe_positions, evolve_wave, madelung_decompose, madelung_residuals,
    gaussian_packet, harmonic_ground_state, coherent_state, wave_norm
)
from oracle.lattice import filtered_path_sum, PathFilter, PathSumResult

__all__ = [
    'two_slit_wave_intensity', 'dark_fringe_positions', 'evolve_wave', 'madelung_decompose',
    'madelung_residuals', 'gaussian_packet', 'harmonic_ground_state', 'coherent_state', 'wave_norm',
    'filtered_path_sum', 'PathFilter', 'PathSumResult',
]
