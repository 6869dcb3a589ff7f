"""Model-error bounds on the identified innovations model"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional

import numpy as np

from ssicert.core.asymptotics import FNormBounds, PerturbationMaps
from ssicert.core.bounds.h2 import H2Bound, h2_error_bound
from ssicert.core.bounds.hinf_lmi import HinfLmiBound, hinf_error_bound_lmi
from ssicert.core.bounds.hinf_perturbative import (
    HinfPerturbativeBound,
    hinf_error_bound_perturbative,
)
from ssicert.core.models import InnovationsModel

__all__ = [
    "H2Bound",
    "HinfPerturbativeBound",
    "HinfLmiBound",
    "BoundReport",
    "compute_all_bounds",
    "h2_error_bound",
    "hinf_error_bound_perturbative",
    "hinf_error_bound_lmi",
]

# Registry for easy lookup
BOUNDS = {
    'h2': H2Bound,
    'hinf_perturbative': HinfPerturbativeBound,
    'hinf_lmi': HinfLmiBound,
}


@dataclass
class BoundReport:
    """All bounds for one identified model, plus the ingredients behind them."""

    h2_bound: float
    hinf_bound_perturbative: float
    hinf_bound_lmi: float
    confidence: float
    fnorm: FNormBounds
    eps_P2: float
    P_bar: np.ndarray
    stats: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    exact: Optional[Dict[str, float]] = None

    @property
    def coverage(self) -> Dict[str, bool]:
        """Whether each bound dominates the exact error (empty unless exact is set)."""
        if not self.exact:
            return {}
        return {
            'h2': self.exact['h2'] <= self.h2_bound,
            'hinf_perturbative': self.exact['hinf'] <= self.hinf_bound_perturbative,
            'hinf_lmi': self.exact['hinf'] <= self.hinf_bound_lmi,
        }

    def as_dict(self) -> Dict[str, Any]:
        fb = self.fnorm
        out: Dict[str, Any] = {
            'confidence': self.confidence,
            'chi2_quantile': fb.chi2_quantile,
            'dof': fb.dof,
            'N': fb.N,
            'h2_bound': self.h2_bound,
            'hinf_bound_perturbative': self.hinf_bound_perturbative,
            'hinf_bound_lmi': self.hinf_bound_lmi,
            'eps': {**fb.as_dict(), 'P1': fb.eps_P1, 'P2': self.eps_P2},
            'adjustment_extra': dict(fb.adjustment_extra),
            'P_bar': self.P_bar.tolist(),
        }
        if self.exact:
            out['exact'] = dict(self.exact)
            out['coverage'] = self.coverage
        return out


def compute_all_bounds(model_hat: InnovationsModel, bounds: FNormBounds,
                       maps: PerturbationMaps,
                       names: Iterable[str] = tuple(BOUNDS)) -> BoundReport:
    """
    Run the registered bound estimators.

    Args:
        model_hat: Nominal model.
        bounds: Frobenius-norm bounds.
        maps: Perturbation maps at model_hat.
        names: Registry keys to evaluate; skipped bounds are reported as NaN.
    """
    values = {key: float('nan') for key in BOUNDS}
    stats: Dict[str, Dict[str, Any]] = {}
    for key in names:
        estimator = BOUNDS[key]()
        values[key] = estimator.estimate(model_hat, bounds, maps)
        stats[key] = estimator.get_stats()
    eps_P2 = stats.get('h2', {}).get('eps_P2', float('nan'))
    return BoundReport(
        h2_bound=values['h2'],
        hinf_bound_perturbative=values['hinf_perturbative'],
        hinf_bound_lmi=values['hinf_lmi'],
        confidence=bounds.confidence,
        fnorm=bounds,
        eps_P2=eps_P2,
        P_bar=maps.gramian.P_bar,
        stats=stats,
    )
