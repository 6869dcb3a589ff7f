"""
ssicert - Certified covariance-driven subspace identification
=============================================================

Identifies an innovations model from output data through a block-Hankel
matrix of sample covariances, guarantees the result is stable and a valid
covariance model, and bounds its H2 and H∞ model error at a chosen
confidence level.
"""

__version__ = "0.1.0"

from ssicert.core.models import CovarianceModel, InnovationsModel, TimeSeries
from ssicert.core.repair import full_pipeline
from ssicert.core.metrics import exact_error_norms

__all__ = [
    "CovarianceModel",
    "InnovationsModel",
    "TimeSeries",
    "full_pipeline",
    "exact_error_norms",
]
