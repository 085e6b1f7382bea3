"""
Experiment catalog
Concrete drivers behind the command surface and the registry that names them
"""

import logging
from typing import Dict, List

from core.errors import ConfigError, GeometryError, InsufficientFringesError
from core.models import ExperimentConfig, wrap_angle
from experiments.aharonov_bohm import aharonov_bohm
from experiments.barrier import SPEED_RANGE, barrier_scan, classically_forbidden
from experiments.base import BaseExperiment, ExperimentResult
from experiments.double_slit import (
    double_slit, fringe_visibility, nonzero_minimum_report, profile_l1, screen_distance_sweep, with_oracle
)
from experiments.epr import disturbed_pair_is_physical, epr_compensation
from experiments.uncertainty import analytic_uncertainty_product, uncertainty_product

logger = logging.getLogger(__name__)


class DoubleSlitExperiment(BaseExperiment):
    """Double slit screen density with optional intrusion"""

    def run(self, cfg: ExperimentConfig) -> ExperimentResult:
        profile = double_slit(cfg)
        visibility = fringe_visibility(profile, cfg)
        self.logger.info(f"Fringe visibility {visibility:.4f}")
        return ExperimentResult(profiles=[("double_slit", profile)], extras={"visibility": visibility})


class SweepExperiment(BaseExperiment):
    """Double slit profiles over a range of screen distances"""

    def run(self, cfg: ExperimentConfig) -> ExperimentResult:
        if not cfg.sweep_distances:
            raise ConfigError("missing", "sweep needs sweep.distances", key="sweep.distances")
        try:
            profiles = screen_distance_sweep(cfg, cfg.sweep_distances)
        except GeometryError as e:
            raise ConfigError("range", str(e), key="sweep.distances") from e

        steps = [profile_l1(a, b) for a, b in zip(profiles, profiles[1:])]
        return ExperimentResult(
            profiles=[(f"sweep_{i:02d}", p) for i, p in enumerate(profiles)],
            extras={
                "distances": list(cfg.sweep_distances),
                "visibility": [p.metadata["visibility"] for p in profiles],
                "adjacent_l1": steps,
            },
        )


class AharonovBohmExperiment(BaseExperiment):
    """Two-arm profile shifted by an enclosed flux"""

    def run(self, cfg: ExperimentConfig) -> ExperimentResult:
        profile = aharonov_bohm(cfg)
        return ExperimentResult(
            profiles=[("aharonov_bohm", profile)],
            extras={"flux": cfg.flux, "flux_phase": wrap_angle(cfg.flux)},
        )


class EprExperiment(BaseExperiment):
    """Phase algebra of a correlated pair under intrusion"""

    def run(self, cfg: ExperimentConfig) -> ExperimentResult:
        pair = cfg.epr
        undisturbed, angle = epr_compensation(pair.S_rho, pair.S_rho_prime, pair.delta_S)
        result = {
            "S_rho": float(pair.S_rho),
            "S_rho_prime": float(pair.S_rho_prime),
            "delta_S": float(pair.delta_S),
            "undisturbed_physical": undisturbed,
            "compensating_angle": angle,
            "disturbed_physical": disturbed_pair_is_physical(pair.S_rho, pair.S_rho_prime, pair.delta_S),
            "compensated_physical": disturbed_pair_is_physical(
                pair.S_rho, pair.S_rho_prime, pair.delta_S, partner_shift=pair.delta_S
            ),
        }
        self.logger.info(f"EPR pair: undisturbed={undisturbed}, compensating angle={angle:.6g}")
        return ExperimentResult(epr=result)


class BarrierExperiment(BaseExperiment):
    """Search for physical paths across a classically forbidden barrier"""

    def run(self, cfg: ExperimentConfig) -> ExperimentResult:
        report = barrier_scan(cfg)
        return ExperimentResult(
            tunneling=report,
            extras={
                "n_attempts": report.n_attempts,
                "n_transmitted": report.n_transmitted,
                "transmitted_fraction": report.transmitted_fraction,
                "classically_forbidden": classically_forbidden(cfg),
                "speed_range": list(SPEED_RANGE),
            },
        )


class OracleCompareExperiment(BaseExperiment):
    """Double slit profile next to the two-slit wave intensity"""

    def run(self, cfg: ExperimentConfig) -> ExperimentResult:
        profile = with_oracle(double_slit(cfg), cfg)
        report = nonzero_minimum_report(profile, cfg)
        profile.metadata.update(report)

        extras = dict(report)
        extras["analytic_uncertainty_product"] = analytic_uncertainty_product(cfg)
        try:
            extras["uncertainty_product"] = uncertainty_product(profile, cfg)
        except InsufficientFringesError as e:
            self.logger.warning(f"No uncertainty product: {e}")
            extras["uncertainty_product"] = None
        return ExperimentResult(profiles=[("oracle_compare", profile)], extras=extras)


class ExperimentRegistry:
    """
    Maps experiment names to driver instances
    """

    def __init__(self):
        self._experiments: Dict[str, BaseExperiment] = {}

    def register(self, experiment: BaseExperiment) -> None:
        """
        Register an experiment under its derived name

        Args:
            experiment: Driver instance
        """
        self._experiments[experiment.get_experiment_name()] = experiment

    def get(self, name: str) -> BaseExperiment:
        """
        Look up an experiment

        Raises:
            ConfigError: If no experiment has that name
        """
        try:
            return self._experiments[name]
        except KeyError:
            known = ", ".join(sorted(self._experiments))
            raise ConfigError("unknown_key", f"unknown experiment '{name}' (known: {known})", key="experiment")

    def names(self) -> List[str]:
        return list(self._experiments)

    def get_registered_experiments(self) -> Dict[str, BaseExperiment]:
        return dict(self._experiments)


def register_experiments() -> ExperimentRegistry:
    """
    Build the registry holding every experiment driver

    Returns:
        ExperimentRegistry with all catalog entries
    """
    registry = ExperimentRegistry()
    for experiment_class in (
        DoubleSlitExperiment,
        SweepExperiment,
        AharonovBohmExperiment,
        EprExperiment,
        BarrierExperiment,
        OracleCompareExperiment,
    ):
        registry.register(experiment_class())
    logger.debug(f"Registered experiments: {', '.join(registry.names())}")
    return registry


def get_experiment(name: str) -> BaseExperiment:
    """Driver for the named experiment."""
    return register_experiments().get(name)
