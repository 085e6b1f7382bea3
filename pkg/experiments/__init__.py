"""
Experiments package: drivers for the double slit family, Aharonov-Bohm, EPR and barrier runs
"""

from experiments.base import BaseExperiment, ExperimentResult
from experiments.double_slit import (
    double_slit, screen_distance_sweep, single_slit_profile, detect_fringes, fringe_visibility,
    nonzero_minimum_report, profile_l1
)
from experiments.aharonov_bohm import aharonov_bohm, gauge_equivalent
from experiments.epr import epr_compensation, disturbed_pair_is_physical
from experiments.barrier import barrier_scan
from experiments.uncertainty import uncertainty_product, analytic_uncertainty_product
from experiments.catalog import ExperimentRegistry, register_experiments, get_experiment

__all__ = [
    'BaseExperiment', 'ExperimentResult',
    'double_slit', 'screen_distance_sweep', 'single_slit_profile', 'detect_fringes', 'fringe_visibility',
    'nonzero_minimum_report', 'profile_l1',
    'aharonov_bohm', 'gauge_equivalent',
    'epr_compensation', 'disturbed_pair_is_physical',
    'barrier_scan',
    'uncertainty_product', 'analytic_uncertainty_product',
    'ExperimentRegistry', 'register_experiments', 'get_experiment',
]
