"""
Reference systems.

In each system the printed input matrix is the Kalman gain K and the printed
noise covariance is Q, so B = K Q^{1/2} and F = Q^{1/2}.
"""

import numpy as np

from ssicert.core.models import InnovationsModel

_C = [[-0.3, -0.65], [0.76, -1.1]]
_Q = [[0.075, 0.037], [0.037, 0.068]]


def slow_pole_system() -> InnovationsModel:
    """Two-channel system with a lightly damped pole pair (|λ| ≈ 0.9995)."""
    return InnovationsModel(
        A=np.array([[0.874, 0.8], [-0.2, 0.96]]),
        K=np.array([[0.18, 0.85], [-0.25, -0.4]]),
        Q=np.array(_Q),
        C=np.array(_C),
        name="slow_pole",
    )


def certification_system() -> InnovationsModel:
    """Two-channel system used for bound certification (‖G_e‖_H2 ≈ 0.5113, ‖G_e‖_∞ ≈ 0.9774)."""
    return InnovationsModel(
        A=np.array([[0.58, 0.23], [-0.39, 0.82]]),
        K=np.array([[0.15, 0.1], [-0.25, -0.4]]),
        Q=np.array(_Q),
        C=np.array(_C),
        name="certification",
    )


def scalar_system() -> InnovationsModel:
    """First-order scalar system a = 0.8, c = 0.1, k = 0.35, q = 0.001."""
    return InnovationsModel(
        A=np.array([[0.8]]),
        K=np.array([[0.35]]),
        Q=np.array([[0.001]]),
        C=np.array([[0.1]]),
        name="scalar",
    )


# Registry for easy lookup
SYSTEMS = {
    'slow_pole': slow_pole_system,
    'certification': certification_system,
    'scalar': scalar_system,
}
