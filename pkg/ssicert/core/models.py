"""
Value types shared across the identification pipeline.

All types are immutable once built; arrays are coerced to float and checked
for consistent dimensions at construction.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ssicert.core.errors import DimensionMismatch
from ssicert.core.linalg import (
    as_matrix,
    check_symmetric,
    solve_dlyap,
    spectral_radius,
    sqrtm_psd,
    STABILITY_MARGIN,
    symmetrize,
)


def _freeze(*arrays: np.ndarray) -> None:
    for arr in arrays:
        arr.setflags(write=False)


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Uniform grid ω_k = −π + 2πk/n on [−π, π), which contains ω = 0 for even n."""

    n_points: int = 4096

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("n_points must be positive")

    @property
    def omegas(self) -> np.ndarray:
        return -np.pi + 2.0 * np.pi * np.arange(self.n_points) / self.n_points

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.n_points


@dataclass(frozen=True, eq=False)
class TransferFunction:
    """G(z) = C (zI − A)^{-1} B + Dff."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Dff: np.ndarray

    def __post_init__(self):
        A, B, C, Dff = (as_matrix(m, name) for m, name in
                        zip((self.A, self.B, self.C, self.Dff), "A B C Dff".split()))
        n = A.shape[0]
        if A.shape != (n, n) or B.shape[0] != n or C.shape[1] != n or \
                Dff.shape != (C.shape[0], B.shape[1]):
            raise DimensionMismatch(
                f"TransferFunction: A{A.shape} B{B.shape} C{C.shape} Dff{Dff.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "Dff", Dff)

    @property
    def is_stable(self) -> bool:
        return spectral_radius(self.A) < 1.0 - STABILITY_MARGIN

    def evaluate(self, omegas: np.ndarray) -> np.ndarray:
        """G(e^{iω}) for each ω; complex array of shape (len(omegas), n_y, n_u)."""
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        n = self.A.shape[0]
        if n == 0:
            return np.broadcast_to(self.Dff.astype(complex), (len(omegas),) + self.Dff.shape).copy()
        z = np.exp(1j * omegas)
        pencil = z[:, None, None] * np.eye(n) - self.A
        rhs = np.broadcast_to(self.B.astype(complex), (len(omegas),) + self.B.shape)
        return self.C @ np.linalg.solve(pencil, rhs) + self.Dff


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """N samples of an n_y-channel output, stored row-wise (N × n_y)."""

    samples: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.samples, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] == 0:
            raise DimensionMismatch(f"time series must be N × n_y, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("time series contains non-finite samples")
        _freeze(data)
        object.__setattr__(self, "samples", data)

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @property
    def n_y(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True, eq=False)
class HankelEstimate:
    """Covariance lags R_0 … R_{2m−1} and the m×m block-Hankel matrix with block (i, j) = R_{i+j+1}."""

    m: int
    covariances: Tuple[np.ndarray, ...]
    H: np.ndarray

    @property
    def n_y(self) -> int:
        return self.covariances[0].shape[0]

    @property
    def R0(self) -> np.ndarray:
        return self.covariances[0]


@dataclass(frozen=True, eq=False)
class Realization:
    """
    Rank-n_x SVD factorization of a Hankel matrix with T = I.

    U, singular_values, V hold the full decomposition; Omega and Gamma are the
    balanced observability and controllability factors.
    """

    n_x: int
    m: int
    n_y: int
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray
    Omega: np.ndarray = field(init=False)
    Gamma: np.ndarray = field(init=False)

    def __post_init__(self):
        root = np.sqrt(self.singular_values[:self.n_x])
        object.__setattr__(self, "Omega", self.U[:, :self.n_x] * root)
        object.__setattr__(self, "Gamma", root[:, None] * self.V[:, :self.n_x].T)

    @property
    def Us(self) -> np.ndarray:
        return self.U[:, :self.n_x]

    @property
    def Vs(self) -> np.ndarray:
        return self.V[:, :self.n_x]

    @property
    def Un(self) -> np.ndarray:
        return self.U[:, self.n_x:]

    @property
    def Vn(self) -> np.ndarray:
        return self.V[:, self.n_x:]

    @property
    def Lambda_s(self) -> np.ndarray:
        return np.diag(self.singular_values[:self.n_x])


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """(A, D, C, R0) whose Markov parameters C A^{k−1} D are the output covariances R_k."""

    A: np.ndarray
    D: np.ndarray
    C: np.ndarray
    R0: np.ndarray

    def __post_init__(self):
        A, D, C, R0 = (as_matrix(self.A, "A"), as_matrix(self.D, "D"),
                       as_matrix(self.C, "C"), as_matrix(self.R0, "R0"))
        n, ny = A.shape[0], R0.shape[0]
        if A.shape != (n, n) or D.shape != (n, ny) or C.shape != (ny, n) or R0.shape != (ny, ny):
            raise DimensionMismatch(
                f"CovarianceModel: A{A.shape} D{D.shape} C{C.shape} R0{R0.shape}")
        R0 = check_symmetric(R0, "R0")
        _freeze(A, D, C, R0)
        for name, value in zip("A D C R0".split(), (A, D, C, R0)):
            object.__setattr__(self, name, value)

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_y(self) -> int:
        return self.R0.shape[0]

    def covariances(self, max_lag: int) -> List[np.ndarray]:
        """R_0 … R_{max_lag}."""
        lags = [self.R0.copy()]
        Ak_D = self.D
        for _ in range(max_lag):
            lags.append(self.C @ Ak_D)
            Ak_D = self.A @ Ak_D
        return lags

    def replace(self, **changes) -> "CovarianceModel":
        fields = {"A": self.A, "D": self.D, "C": self.C, "R0": self.R0}
        fields.update(changes)
        return CovarianceModel(**fields)


@dataclass(frozen=True, eq=False)
class InnovationsModel:
    """
    x_{k+1} = A x_k + K Q^{1/2} e_k,   y_k = C x_k + Q^{1/2} e_k,   E[e eᵀ] = I.

    B = K Q^{1/2} and F = Q^{1/2} (principal symmetric root) are derived.
    """

    A: np.ndarray
    K: np.ndarray
    Q: np.ndarray
    C: np.ndarray
    name: Optional[str] = None

    def __post_init__(self):
        A, K, Q, C = (as_matrix(self.A, "A"), as_matrix(self.K, "K"),
                      as_matrix(self.Q, "Q"), as_matrix(self.C, "C"))
        n, ny = A.shape[0], Q.shape[0]
        if A.shape != (n, n) or K.shape != (n, ny) or C.shape != (ny, n) or Q.shape != (ny, ny):
            raise DimensionMismatch(
                f"InnovationsModel: A{A.shape} K{K.shape} Q{Q.shape} C{C.shape}")
        Q = check_symmetric(Q, "Q")
        _freeze(A, K, Q, C)
        for attr, value in zip("A K Q C".split(), (A, K, Q, C)):
            object.__setattr__(self, attr, value)

    @property
    def n_x(self) -> int:
        return self.A.shape[0]

    @property
    def n_y(self) -> int:
        return self.Q.shape[0]

    @property
    def F(self) -> np.ndarray:
        return sqrtm_psd(self.Q)

    @property
    def B(self) -> np.ndarray:
        return self.K @ self.F

    @property
    def spectral_radius(self) -> float:
        return spectral_radius(self.A)

    @property
    def is_stable(self) -> bool:
        return self.spectral_radius < 1.0 - STABILITY_MARGIN

    def transfer_function(self) -> TransferFunction:
        return TransferFunction(self.A, self.B, self.C, self.F)

    def state_covariance(self) -> np.ndarray:
        """Stationary E[x xᵀ] = A P Aᵀ + B Bᵀ."""
        B = self.B
        return solve_dlyap(self.A, symmetrize(B @ B.T), "controllability")

    def covariance_model(self) -> CovarianceModel:
        """Exact (A, D, C, R0) with D = A P Cᵀ + K Q and R0 = C P Cᵀ + Q."""
        P = self.state_covariance()
        D = self.A @ P @ self.C.T + self.K @ self.Q
        R0 = symmetrize(self.C @ P @ self.C.T + self.Q)
        return CovarianceModel(self.A, D, self.C, R0)

    def exact_covariances(self, max_lag: int) -> List[np.ndarray]:
        """Exact output covariances R_0 … R_{max_lag}."""
        return self.covariance_model().covariances(max_lag)
