"""
Shared fixtures: reference systems and random minimum-phase models.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from ssicert.core.linalg import spectral_radius
from ssicert.core.models import InnovationsModel
from ssicert.core.systems import certification_system, scalar_system, slow_pole_system


def random_innovations_model(seed: int, n_x: int = 2, n_y: int = 2,
                             rho: float = 0.8) -> InnovationsModel:
    """Random stable, minimum-phase innovations model with Q ≻ 0."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n_x, n_x))
    A *= rng.uniform(0.4, rho) / spectral_radius(A)
    C = rng.standard_normal((n_y, n_x))
    K = 0.5 * rng.standard_normal((n_x, n_y))
    while spectral_radius(A - K @ C) > 0.9:
        K *= 0.7
    W = rng.standard_normal((n_y, n_y))
    Q = 0.1 * (W @ W.T) + 0.05 * np.eye(n_y)
    return InnovationsModel(A=A, K=K, Q=Q, C=C, name=f"random{seed}")


@pytest.fixture
def certification():
    return certification_system()


@pytest.fixture
def slow_pole():
    return slow_pole_system()


@pytest.fixture
def scalar():
    return scalar_system()


@pytest.fixture
def random_model():
    return random_innovations_model(7)
