"""
Base class for model-error bound estimators.

Every bound consumes the same ingredients (an identified innovations model,
its Frobenius-norm parameter bounds and the first-order perturbation maps)
and returns a nonnegative scalar bound on a norm of the error system.
"""

import re
from abc import ABC, abstractmethod
from typing import Any, Dict

from ssicert.core.asymptotics import FNormBounds, PerturbationMaps
from ssicert.core.models import InnovationsModel


def _registry_key(class_name: str) -> str:
    """
    Derive the registry lookup key from a class name.

    'H2Bound'               -> 'h2'
    'HinfPerturbativeBound' -> 'hinf_perturbative'
    'HinfLmiBound'          -> 'hinf_lmi'
    """
    stem = class_name.replace('Bound', '')
    return re.sub(r'(?<!^)(?=[A-Z])', '_', stem).lower()


class BoundEstimator(ABC):
    """
    Abstract base class for error-system norm bounds.

    Subclasses fill ``self.stats`` with the intermediate quantities of their
    last estimate so reports can show how a bound was assembled.
    """

    def __init__(self, **kwargs):
        """Initialize estimator with optional parameters"""
        self.params = kwargs
        self.stats: Dict[str, Any] = {}

    @abstractmethod
    def estimate(self, model_hat: InnovationsModel, bounds: FNormBounds,
                 maps: PerturbationMaps) -> float:
        """
        Bound a norm of G_e − G̃_e.

        Args:
            model_hat: Nominal model the bound is centred on.
            bounds: Frobenius-norm parameter bounds at the target confidence.
            maps: First-order perturbation maps evaluated at model_hat.

        Returns:
            Nonnegative bound.
        """
        pass

    def get_stats(self) -> Dict[str, Any]:
        """Return intermediate quantities of the last estimate"""
        return self.stats

    @property
    def name(self) -> str:
        """Return the registry key of this bound"""
        return _registry_key(self.__class__.__name__)
