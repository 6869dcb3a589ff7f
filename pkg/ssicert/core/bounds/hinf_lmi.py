"""
Robust bounded-real H∞ bound.

The error system is written as a nominal matrix M̃ = [[𝒜̃, ℬ̃], [𝒞̃, 0]] with
𝒜̃ = diag(Ã, Ã), ℬ̃ = [B̃; B̃], 𝒞̃ = [C̃, −C̃], plus one norm-bounded channel per
uncertain parameter, M = M̃ + Σ_k H_k F_k E_k with ‖F_k‖₂ ≤ 1. Eliminating the
F_k with one multiplier μ_k each gives the SDP

    minimize γ̄²  subject to  P ≻ 0 and

    [ −𝒫      𝒫M̃                          𝒫H_1 … 𝒫H_K ]
    [  ·   −diag(P, γ̄²I) + Σ μ_k E_kᵀE_k     0   …   0  ]  ≺ 0,   𝒫 = diag(P, I)
    [  ·        ·                          −μ_k I         ]

whose optimum certifies ‖G_e − G̃_e‖_∞ ≤ γ̄ for every parameter set inside the
Frobenius-norm box.
"""

import logging
from typing import List, Optional, Tuple

import cvxpy as cp
import numpy as np
import scipy.linalg

from ssicert.core.asymptotics import FNormBounds, PerturbationMaps
from ssicert.core.base import BoundEstimator
from ssicert.core.errors import InfeasibleAtAnyGamma, SolverFailure
from ssicert.core.linalg import check_stable
from ssicert.core.models import InnovationsModel
from ssicert.core.sdp import INFEASIBLE, SdpProblem, psd, solve_sdp

logger = logging.getLogger(__name__)

LMI_MARGIN = 1e-9


def uncertainty_channels(n: int, ny: int, bounds: FNormBounds
                         ) -> List[Tuple[str, np.ndarray, np.ndarray]]:
    """
    (name, H_k, E_k) for every channel with a positive eps.

    Rows of H_k and columns of E_k follow the stacking [x_true; x_hat; y/u].
    """
    size = 2 * n + ny
    channels = []
    layout = (
        ('A', bounds.eps_A, slice(0, n), slice(0, n)),
        ('B', bounds.eps_B, slice(0, n), slice(2 * n, size)),
        ('C', bounds.eps_C, slice(2 * n, size), slice(0, n)),
        ('F', bounds.eps_F, slice(2 * n, size), slice(2 * n, size)),
    )
    for name, eps, rows, cols in layout:
        if eps <= 0:
            continue
        root = np.sqrt(eps)
        height = rows.stop - rows.start
        width = cols.stop - cols.start
        H = np.zeros((size, height))
        H[rows, :] = root * np.eye(height)
        E = np.zeros((width, size))
        E[:, cols] = root * np.eye(width)
        channels.append((name, H, E))
    return channels


class HinfLmiBound(BoundEstimator):
    """
    Robust-LMI H∞ bound.

    Best for: certificates that hold over the whole parameter box
    Cost: one SDP of size 2(2n + n_y) + channel widths
    """

    def estimate(self, model_hat: InnovationsModel, bounds: FNormBounds,
                 maps: PerturbationMaps) -> float:
        check_stable(model_hat.A, "A_hat")
        A, B, C = model_hat.A, model_hat.B, model_hat.C
        n, ny = model_hat.n_x, model_hat.n_y
        channels = uncertainty_channels(n, ny, bounds)
        if not channels:
            self.stats = {'bound': 0.0, 'channels': [], 'multipliers': {}}
            return 0.0

        n2 = 2 * n
        size = n2 + ny
        M_nom = np.block([
            [scipy.linalg.block_diag(A, A), np.vstack([B, B])],
            [np.hstack([C, -C]), np.zeros((ny, ny))],
        ])

        P = cp.Variable((n2, n2), symmetric=True)
        g = cp.Variable(nonneg=True)
        mus = [cp.Variable(nonneg=True) for _ in channels]
        weight = cp.bmat([[P, np.zeros((n2, ny))], [np.zeros((ny, n2)), np.eye(ny)]])
        target = cp.bmat([[P, np.zeros((n2, ny))], [np.zeros((ny, n2)), g * np.eye(ny)]])
        middle = -target + sum(mu * (E.T @ E) for mu, (_, _, E) in zip(mus, channels))

        widths = [H.shape[1] for _, H, _ in channels]
        top = [-weight, weight @ M_nom] + [weight @ H for _, H, _ in channels]
        second = [(weight @ M_nom).T, middle] + [np.zeros((size, w)) for w in widths]
        rows = [top, second]
        for k, (_, H, _) in enumerate(channels):
            row = [(weight @ H).T, np.zeros((widths[k], size))]
            for j, w in enumerate(widths):
                row.append(-mus[k] * np.eye(w) if j == k else np.zeros((widths[k], w)))
            rows.append(row)
        lmi = cp.bmat(rows)

        problem = SdpProblem(
            objective=cp.Minimize(g),
            constraints=[psd(-lmi, LMI_MARGIN), psd(P, LMI_MARGIN)],
            variables={'P': P, 'g': g, **{f'mu_{name}': mu
                                          for mu, (name, _, _) in zip(mus, channels)}},
            name="robust_bounded_real",
        )
        result = solve_sdp(problem, self.params.get('solvers'))
        if result.status == INFEASIBLE:
            raise InfeasibleAtAnyGamma(
                "robust bounded-real LMI is infeasible: the parameter box admits unstable systems")
        if not result.ok:
            raise SolverFailure("robust bounded-real LMI could not be solved")

        gamma = float(np.sqrt(max(float(result.values['g']), 0.0)))
        logger.debug("hinf_lmi: gamma=%.6g with channels %s", gamma, [c[0] for c in channels])
        self.stats = {
            'bound': gamma,
            'channels': [name for name, _, _ in channels],
            'multipliers': {name: float(result.values[f'mu_{name}'])
                            for name, _, _ in channels},
            'max_violation': result.max_violation,
            'solver': result.solver,
        }
        return gamma


def hinf_error_bound_lmi(model_hat: InnovationsModel, bounds: FNormBounds,
                         maps: Optional[PerturbationMaps] = None) -> float:
    """Functional form of :class:`HinfLmiBound`."""
    return HinfLmiBound().estimate(model_hat, bounds, maps)
