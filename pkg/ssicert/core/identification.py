"""
Covariance-driven stochastic subspace identification.

    sample covariances -> block-Hankel matrix -> SVD realization
    -> least-squares A -> Riccati recovery of (K, Q)

The Hankel matrix uses the lag-one convention, block (i, j) = R_{i+j+1}
(0-based i, j), so that H = Ω Γ with Ω = [C; CA; ...] and Γ = [D, AD, ...].
"""

import logging
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from ssicert.core.errors import (
    DimensionMismatch,
    IllConditionedShift,
    InsufficientData,
    InsufficientLags,
    RankDeficient,
)
from ssicert.core.linalg import check_stable, solve_dare, symmetrize
from ssicert.core.models import (
    CovarianceModel,
    HankelEstimate,
    InnovationsModel,
    Realization,
    TimeSeries,
)

logger = logging.getLogger(__name__)

RANK_TOL = 1e-12
SHIFT_COND_LIMIT = 1e10


def sample_covariances(ts: TimeSeries, max_lag: int) -> List[np.ndarray]:
    """
    Empirical output covariances R̃_k = (1/(N−k)) Σ_t y_t y_{t−k}ᵀ for k = 0 … max_lag.

    Args:
        ts: Output time series.
        max_lag: Largest lag to estimate.

    Returns:
        List of max_lag + 1 matrices, each n_y × n_y; R̃_0 is symmetrized.

    Raises:
        InsufficientData: if max_lag ≥ N.
    """
    if max_lag < 0:
        raise ValueError("max_lag must be nonnegative")
    if max_lag >= ts.N:
        raise InsufficientData(f"max_lag={max_lag} needs more than {ts.N} samples")
    Y = ts.samples
    covs = []
    for k in range(max_lag + 1):
        covs.append(Y[k:].T @ Y[:ts.N - k] / (ts.N - k))
    covs[0] = symmetrize(covs[0])
    return covs


def build_hankel(covs: Sequence[np.ndarray], m: int) -> HankelEstimate:
    """
    Assemble the m×m block-Hankel matrix with block (i, j) = R_{i+j+1}.

    Args:
        covs: R_0, R_1, ... (at least 2m lags).
        m: Block depth.

    Raises:
        InsufficientLags: if fewer than 2m lags are given.
    """
    if m < 1:
        raise ValueError("Hankel depth m must be at least 1")
    if len(covs) < 2 * m:
        raise InsufficientLags(f"depth m={m} needs lags R_0..R_{2 * m - 1}, got {len(covs)}")
    lags = tuple(np.atleast_2d(np.asarray(R, dtype=float)) for R in covs[:2 * m])
    ny = lags[0].shape[0]
    if any(R.shape != (ny, ny) for R in lags):
        raise DimensionMismatch("covariance lags must all be n_y × n_y")
    H = np.block([[lags[i + j + 1] for j in range(m)] for i in range(m)])
    return HankelEstimate(m=m, covariances=lags, H=H)


def _fix_signs(U: np.ndarray, V: np.ndarray) -> None:
    # Largest-magnitude entry of each left singular vector made positive.
    pivots = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[pivots, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    U *= signs
    V *= signs


def svd_sign_fixed(H: np.ndarray):
    """Full SVD H = U diag(s) Vᵀ with the deterministic sign convention; returns (U, s, V)."""
    U, s, Vt = np.linalg.svd(H)
    V = Vt.T.copy()
    _fix_signs(U, V)
    return U, s, V


def realize(hankel: HankelEstimate, n_x: int) -> Realization:
    """
    Balanced rank-n_x factorization H ≈ Ω Γ from a sign-fixed SVD.

    Raises:
        RankDeficient: if n_x exceeds the Hankel size or σ_{n_x}/σ_1 < 1e-12.
    """
    size = hankel.H.shape[0]
    if not 1 <= n_x <= size:
        raise RankDeficient(f"order n_x={n_x} outside [1, {size}]")
    U, s, V = svd_sign_fixed(hankel.H)
    if s[0] <= 0 or s[n_x - 1] / s[0] < RANK_TOL:
        raise RankDeficient(f"sigma_{n_x}/sigma_1 = {s[n_x - 1] / max(s[0], 1e-300):.3e} "
                            f"below {RANK_TOL:g}")
    logger.debug("realize: singular values %s", np.array2string(s[:n_x + 2], precision=4))
    return Realization(n_x=n_x, m=hankel.m, n_y=hankel.n_y, U=U, singular_values=s, V=V)


def suggest_order(singular_values: Sequence[float], max_order: Optional[int] = None) -> int:
    """
    Advisory model order: the index i maximizing σ_i/σ_{i+1}.

    Args:
        singular_values: Descending singular values of the Hankel matrix.
        max_order: Largest order to consider (defaults to len − 1).
    """
    s = np.asarray(singular_values, dtype=float)
    if s.size < 2:
        return 1
    limit = min(max_order or s.size - 1, s.size - 1)
    floor = max(s[0], 1e-300) * 1e-300
    ratios = s[:limit] / np.maximum(s[1:limit + 1], floor)
    return int(np.argmax(ratios)) + 1


def shift_blocks(real: Realization):
    """(Ω̄, Ω̲): Ω without its last block row and without its first block row."""
    ny = real.n_y
    return real.Omega[:-ny], real.Omega[ny:]


def extract_covariance_model(real: Realization, R0: np.ndarray) -> CovarianceModel:
    """
    Read (A, D, C, R0) off a realization.

    C is the first block row of Ω, D the first block column of Γ, and A the
    least-squares solution of Ω̄ A = Ω̲ computed through a QR factorization.

    Raises:
        InsufficientLags: if m < 2.
        IllConditionedShift: if cond(Ω̄) > 1e10.
    """
    if real.m < 2:
        raise InsufficientLags("the shift equation needs at least two block rows (m >= 2)")
    upper, lower = shift_blocks(real)
    cond = np.linalg.cond(upper)
    if not np.isfinite(cond) or cond > SHIFT_COND_LIMIT:
        raise IllConditionedShift(f"cond(upper observability block) = {cond:.3e}")
    Qf, Rf = np.linalg.qr(upper)
    A = scipy.linalg.solve_triangular(Rf, Qf.T @ lower)
    C = real.Omega[:real.n_y]
    D = real.Gamma[:, :real.n_y]
    return CovarianceModel(A=A, D=D, C=C, R0=R0)


def covariance_to_innovations(cm: CovarianceModel) -> InnovationsModel:
    """
    Solve the Riccati equation of a covariance model and return (A, K, Q, C).

    Raises:
        UnstableMatrix: if cm.A is not stable.
        DareInfeasible: if the model is not positive real.
    """
    check_stable(cm.A)
    _, Q, K = solve_dare(cm.A, cm.D, cm.C, cm.R0)
    return InnovationsModel(A=cm.A, K=K, Q=Q, C=cm.C)


def identify_covariance_model(ts: TimeSeries, m: int, n_x: int):
    """
    Raw chain up to the covariance model, before any validity check.

    Returns:
        (hankel, realization, covariance_model)

    Raises:
        InsufficientData: if N < 2·m·n_y.
    """
    if ts.N < 2 * m * ts.n_y:
        raise InsufficientData(f"N={ts.N} is below 2·m·n_y = {2 * m * ts.n_y}")
    hankel = build_hankel(sample_covariances(ts, 2 * m - 1), m)
    real = realize(hankel, n_x)
    return hankel, real, extract_covariance_model(real, hankel.R0)
