"""
Experiment driver base class and result container
"""

import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from core.models import DensityProfile, ExperimentConfig, TunnelingReport


@dataclass
class ExperimentResult:
    """Everything an experiment run hands to the output layer."""
    profiles: List[Tuple[str, DensityProfile]] = field(default_factory=list)
    tunneling: Optional[TunnelingReport] = None
    epr: Optional[Dict[str, Any]] = None
    extras: Dict[str, Any] = field(default_factory=dict)


class BaseExperiment(ABC):
    """
    Abstract base class for experiment drivers
    """

    def __init__(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    @abstractmethod
    def run(self, cfg: ExperimentConfig) -> ExperimentResult:
        """
        Execute the experiment

        Args:
            cfg: Validated experiment configuration

        Returns:
            ExperimentResult with the profiles and reports to emit
        """
        pass

    def get_experiment_name(self) -> str:
        """
        Get the experiment name from the class name

        Returns:
            Name in snake_case without the Experiment suffix
        """
        class_name = self.__class__.__name__
        if class_name.endswith("Experiment"):
            class_name = class_name[:-len("Experiment")]
        return re.sub(r"(?<!^)(?=[A-Z])", "_", class_name).lower()

    def describe(self) -> str:
        doc = (self.__class__.__doc__ or "").strip()
        return doc.splitlines()[0] if doc else self.get_experiment_name()
