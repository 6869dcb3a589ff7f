"""
First-order H∞ bound from the triangle and submultiplicative inequalities.

With R(ω) = (e^{iω}I − Ã)⁻¹, dropping second-order terms,

    ‖G_e − G̃_e‖_∞ ≤ ‖C̃R‖_∞ ε_A ‖RB̃‖_∞ + ε_F + ε_C ‖RB̃‖_∞ + ‖C̃R‖_∞ ε_B.
"""

from typing import Optional

import numpy as np

from ssicert.core.asymptotics import FNormBounds, PerturbationMaps
from ssicert.core.base import BoundEstimator
from ssicert.core.linalg import check_stable, hinf_norm
from ssicert.core.models import InnovationsModel, TransferFunction
from ssicert.utils.config import load_settings


class HinfPerturbativeBound(BoundEstimator):
    """
    Perturbative H∞ bound.

    Best for: quick peak-gain certificates
    Cost: two H∞ norm evaluations
    """

    def estimate(self, model_hat: InnovationsModel, bounds: FNormBounds,
                 maps: PerturbationMaps) -> float:
        check_stable(model_hat.A, "A_hat")
        A, B, C = model_hat.A, model_hat.B, model_hat.C
        n, ny = model_hat.n_x, model_hat.n_y
        rel_tol = self.params.get('rel_tol', load_settings().hinf_rel_tol)

        gain_C = hinf_norm(TransferFunction(A, np.eye(n), C, np.zeros((ny, n))), rel_tol)
        gain_B = hinf_norm(TransferFunction(A, B, np.eye(n), np.zeros((n, ny))), rel_tol)

        bound = (gain_C * bounds.eps_A * gain_B + bounds.eps_F
                 + bounds.eps_C * gain_B + gain_C * bounds.eps_B)
        self.stats = {
            'gain_C_resolvent': gain_C,
            'gain_resolvent_B': gain_B,
            'bound': float(bound),
        }
        return self.stats['bound']


def hinf_error_bound_perturbative(model_hat: InnovationsModel, bounds: FNormBounds,
                                  maps: Optional[PerturbationMaps] = None) -> float:
    """Functional form of :class:`HinfPerturbativeBound`."""
    return HinfPerturbativeBound().estimate(model_hat, bounds, maps)
