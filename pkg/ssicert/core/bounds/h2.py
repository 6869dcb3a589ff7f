"""
H2 bound on the model error.

Expanding ‖G_e − G̃_e‖²_H2 = ‖δF‖² + tr(B̄ᵀ(P̄ + δP)B̄) around the zero error
system, where P̄ = [[X, −X], [−X, X]] makes tr(B̄ᵀP̄B̄) vanish, gives

    ‖G_e − G̃_e‖²_H2 ≤ ε_F² + ε_B²‖P̄‖_F + 2‖B̄‖_F ε_B ‖δP1‖ + ‖B̄‖²_F ‖δP2‖_F

with δP1 the first-order gramian change (bounded through M1) and

    ‖δP2‖_F ≤ ‖(Āᵀ⊗Āᵀ − I)⁻¹‖₂ (2‖Ā‖_F ε_P1 ε_A + ‖P̄‖_F ε_A² + ε_C²).
"""

import numpy as np

from ssicert.core.asymptotics import FNormBounds, PerturbationMaps
from ssicert.core.base import BoundEstimator
from ssicert.core.linalg import check_stable
from ssicert.core.models import InnovationsModel


class H2Bound(BoundEstimator):
    """
    Second-order H2 bound.

    Best for: comparing identification runs by total error energy
    Cost: one Lyapunov solve (already inside the maps)
    """

    def estimate(self, model_hat: InnovationsModel, bounds: FNormBounds,
                 maps: PerturbationMaps) -> float:
        check_stable(model_hat.A, "A_hat")
        gram = maps.gramian
        norm_P = float(np.linalg.norm(gram.P_bar, "fro"))
        norm_A = float(np.linalg.norm(gram.A_bar, "fro"))
        norm_B = float(np.linalg.norm(gram.B_bar, "fro"))

        eps_P1 = bounds.eps_P1
        eps_P2 = gram.lyap_inv_norm * (2.0 * norm_A * eps_P1 * bounds.eps_A
                                       + norm_P * bounds.eps_A ** 2 + bounds.eps_C ** 2)
        squared = (bounds.eps_F ** 2 + bounds.eps_B ** 2 * norm_P
                   + 2.0 * norm_B * bounds.eps_B * eps_P1 + norm_B ** 2 * eps_P2)

        self.stats = {
            'eps_P1': eps_P1,
            'eps_P2': eps_P2,
            'P_bar_fro': norm_P,
            'B_bar_fro': norm_B,
            'bound': float(np.sqrt(max(squared, 0.0))),
        }
        return self.stats['bound']


def h2_error_bound(model_hat: InnovationsModel, bounds: FNormBounds,
                   maps: PerturbationMaps) -> float:
    """Functional form of :class:`H2Bound`."""
    return H2Bound().estimate(model_hat, bounds, maps)
