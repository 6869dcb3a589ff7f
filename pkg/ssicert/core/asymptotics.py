"""
Asymptotic statistics of covariance-driven identification.

Everything is expressed in terms of the stacked sample statistic

    θ = (vec R̃0; vec H̃),   dim θ = n_y² + (m n_y)²,

whose fluctuation √N(θ̃ − θ) is asymptotically N(0, 𝒫) for Gaussian data.
First-order maps push θ-perturbations through the SVD realization, the
least-squares A, and the Riccati equation to (δA, δB, δC, δF), and the
chi-square quantile of dim θ degrees of freedom turns 𝒫 into Frobenius-norm
error bounds at a stated confidence.

Conventions:
    vec    column-major (see ssicert.core.linalg)
    θ[R0]  index a + b·n_y, lag 0
    θ[H]   index r + c·L with L = m·n_y, block (r // n_y, c // n_y), lag r//n_y + c//n_y + 1
"""

import functools
import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.fft
import scipy.linalg
from scipy.special import gammainc, gammaincinv

from ssicert.core.errors import DimensionMismatch, RankDeficient, SingularJ1
from ssicert.core.identification import (
    build_hankel,
    covariance_to_innovations,
    extract_covariance_model,
    realize,
    shift_blocks,
)
from ssicert.core.linalg import (
    check_stable,
    commutation_matrix,
    kron,
    solve_dare,
    solve_dlyap,
    spectral_density,
    spectral_radius,
    sqrtm_psd,
    symmetrize,
)
from ssicert.core.models import CovarianceModel, FrequencyGrid, InnovationsModel, Realization
from ssicert.utils.config import MIN_QUADRATURE_POINTS, load_settings

logger = logging.getLogger(__name__)

MAX_QUADRATURE_POINTS = 2 ** 18
ALIASING_TOL = 1e-12
SVD_GAP_TOL = 1e-12
CROSS_TERMS = ("exact", "commuted")
J1_COND_LIMIT = 1e12


# ---------------------------------------------------------------------------
# asymptotic covariance of θ
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AsymptoticCovariance:
    """
    Joint covariance 𝒫 of √N·(vec R̃0, vec H̃).

    ``P`` is the assembled symmetric matrix; the blocks are views into it.
    """

    P: np.ndarray
    m: int
    n_y: int
    n_quadrature: int = 0
    method: str = "frequency"

    @property
    def dim(self) -> int:
        return self.P.shape[0]

    @property
    def P_R0(self) -> np.ndarray:
        d0 = self.n_y ** 2
        return self.P[:d0, :d0]

    @property
    def P_R0H(self) -> np.ndarray:
        d0 = self.n_y ** 2
        return self.P[:d0, d0:]

    @property
    def P_H(self) -> np.ndarray:
        d0 = self.n_y ** 2
        return self.P[d0:, d0:]

    @functools.cached_property
    def sqrt(self) -> np.ndarray:
        """Symmetric PSD square root, eigenvalues clipped at zero."""
        return sqrtm_psd(self.P)


def _theta_index(m: int, ny: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(lag, row, col) of every entry of θ."""
    L = m * ny
    lags, rows, cols = [], [], []
    for b in range(ny):
        for a in range(ny):
            lags.append(0)
            rows.append(a)
            cols.append(b)
    for c in range(L):
        for r in range(L):
            lags.append(r // ny + c // ny + 1)
            rows.append(r % ny)
            cols.append(c % ny)
    return np.array(lags), np.array(rows), np.array(cols)


def _shift_range(m: int) -> Tuple[int, int]:
    # lags run over 0 .. 2m−1, so i − j ≥ −(2m−1) and i + j ≤ 4m−2
    return -(2 * m - 1), 4 * m - 2


def _assemble(W: np.ndarray, m: int, ny: int, cross_term: str = "exact") -> np.ndarray:
    """
    Build 𝒫 from the lag-product sums W[s][p,q,r,t] = Σ_u R(u+s)[p,q] R(u)[r,t].

    Gaussian fourth moments give
        𝒫[(i,a,b),(j,c,d)] = W[i−j][a,c,b,d] + W[i+j][a,d,b,c].

    ``cross_term="commuted"`` replaces the second term by the index swap
    W[i−j][b,c,a,d] at every lag, i.e. (I + K) applied to the first term. Both
    agree on the R̃0 block; at nonzero lags the commuted form doubles the
    variance of a white process.
    """
    if cross_term not in CROSS_TERMS:
        raise ValueError(f"cross_term must be one of {CROSS_TERMS}, got {cross_term!r}")
    lag, row, col = _theta_index(m, ny)
    offset = -_shift_range(m)[0]
    i, j = lag[:, None], lag[None, :]
    a, b = row[:, None], col[:, None]
    c, d = row[None, :], col[None, :]
    first = W[i - j + offset, a, c, b, d]
    if cross_term == "commuted":
        return first + W[i - j + offset, b, c, a, d]
    return first + W[i + j + offset, a, d, b, c]


def _finish(P: np.ndarray, m: int, ny: int, n_quadrature: int, method: str) -> AsymptoticCovariance:
    P = np.asarray(P)
    if np.iscomplexobj(P):
        scale = max(np.max(np.abs(P)), 1e-300)
        residue = np.max(np.abs(P.imag)) / scale
        if residue > 1e-10:
            warnings.warn(f"asymptotic covariance has imaginary residue {residue:.2e}",
                          RuntimeWarning)
        P = P.real
    P = symmetrize(P)
    floor = np.min(np.linalg.eigvalsh(P))
    if floor < -1e-8 * max(np.linalg.norm(P, 2), 1e-300):
        warnings.warn(f"asymptotic covariance is indefinite (min eigenvalue {floor:.3e})",
                      RuntimeWarning)
    return AsymptoticCovariance(P=P, m=m, n_y=ny, n_quadrature=n_quadrature, method=method)


def _required_points(rho: float, m: int) -> int:
    if rho <= 0:
        return 0
    span = int(np.ceil(np.log(ALIASING_TOL) / np.log(rho))) + 8 * m
    return 1 << max(span - 1, 1).bit_length()


def asymptotic_covariance(model: InnovationsModel, m: int,
                          grid: Optional[FrequencyGrid] = None,
                          cross_term: str = "exact") -> AsymptoticCovariance:
    """
    Asymptotic covariance of θ by uniform quadrature of the output spectrum.

    W[s] = (1/2π)∫ e^{iωs} S_pq(ω) conj(S_rt(ω)) dω is evaluated for every shift
    at once with an inverse FFT. When the grid is too coarse for the slowest
    pole (periodic aliasing above 1e-12) it is refined up to 2^18 points.

    Args:
        model: Stable innovations model.
        m: Hankel depth.
        grid: Quadrature grid (at least 1024 points; defaults to settings).
        cross_term: "exact" fourth-moment pairing, or "commuted" for the
            closed-form (I + K) spectral expression at every lag.

    Raises:
        UnstableMatrix: if the model is unstable.
    """
    check_stable(model.A)
    if m < 1:
        raise ValueError("m must be at least 1")
    if grid is None:
        grid = FrequencyGrid(load_settings().quadrature_points)
    if grid.n_points < MIN_QUADRATURE_POINTS:
        raise ValueError(f"quadrature grid needs at least {MIN_QUADRATURE_POINTS} points")

    needed = _required_points(spectral_radius(model.A), m)
    if needed > grid.n_points:
        refined = min(needed, MAX_QUADRATURE_POINTS)
        logger.info("refining quadrature grid %d -> %d for slow poles", grid.n_points, refined)
        if needed > MAX_QUADRATURE_POINTS:
            warnings.warn("quadrature grid truncated at 2^18 points; slow poles alias",
                          RuntimeWarning)
        grid = FrequencyGrid(refined)

    ny = model.n_y
    S = spectral_density(model, grid)
    T = np.einsum("kpq,krt->kpqrt", S, np.conj(S))
    full = scipy.fft.ifft(T, axis=0)
    lo, hi = _shift_range(m)
    shifts = np.arange(lo, hi + 1)
    W = full[shifts % grid.n_points] * ((-1.0) ** shifts)[:, None, None, None, None]
    return _finish(_assemble(W, m, ny, cross_term), m, ny, grid.n_points, "frequency")


def asymptotic_covariance_lags(model: InnovationsModel, m: int, tol: float = 1e-12,
                               max_lags: int = 200_000,
                               cross_term: str = "exact") -> AsymptoticCovariance:
    """
    Same covariance from lag sums Σ_u R(u+s) R(u), truncated once ‖C‖‖A^k D‖ < tol·‖R0‖.

    Used as an independent route to :func:`asymptotic_covariance`.
    """
    check_stable(model.A)
    cm = model.covariance_model()
    ny = model.n_y
    scale = tol * max(np.linalg.norm(cm.R0, 2), 1e-300)
    c_norm = np.linalg.norm(cm.C, 2)

    lo, hi = _shift_range(m)
    pos = [cm.R0]
    AkD = cm.D
    while True:
        pos.append(cm.C @ AkD)
        AkD = cm.A @ AkD
        if c_norm * np.linalg.norm(AkD, 2) <= scale or len(pos) > max_lags:
            break
    if len(pos) > max_lags:
        warnings.warn(f"lag sum truncated at {max_lags} lags", RuntimeWarning)
    T = len(pos) - 1
    for _ in range(hi):
        pos.append(cm.C @ AkD)
        AkD = cm.A @ AkD

    span = T + hi
    R = np.zeros((2 * span + 1, ny, ny))
    for k in range(span + 1):
        R[span + k] = pos[k]
        R[span - k] = pos[k].T
    u = np.arange(-T, T + 1) + span
    W = np.stack([np.einsum("upq,urt->pqrt", R[u + s], R[u]) for s in range(lo, hi + 1)])
    return _finish(_assemble(W, m, ny, cross_term), m, ny, 2 * T + 1, "lags")


# ---------------------------------------------------------------------------
# SVD and realization sensitivities
# ---------------------------------------------------------------------------

def svd_perturbation_maps(real: Realization) -> Tuple[np.ndarray, np.ndarray]:
    """
    First-order sensitivities of the balanced factors Ω = U_s Λ_s^{1/2} and Γ = Λ_s^{1/2} V_sᵀ.

    vec(δΩ) ≐ Π1·vec(δH) and vec(δΓ) ≐ Π2·vec(δH). The expansion runs over the
    full singular basis, so rotations inside the retained subspace are included.

    Raises:
        RankDeficient: if a retained singular value is zero or not separated.
    """
    U, s, V = real.U, real.singular_values, real.V
    L, n = U.shape[0], real.n_x
    if V.shape[0] != L or s.size != L:
        raise DimensionMismatch("svd_perturbation_maps expects a square Hankel matrix")
    Pi1 = np.zeros((L * n, L * L))
    Pi2 = np.zeros((n * L, L * L))
    for i in range(n):
        si = s[i]
        others = np.arange(L) != i
        gap = si ** 2 - s ** 2
        if si <= 0 or np.min(np.abs(gap[others])) <= SVD_GAP_TOL * s[0] ** 2:
            raise RankDeficient(f"singular value {i + 1} is zero or repeated")
        root = np.sqrt(si)
        c1 = np.zeros(L)
        c2 = np.zeros(L)
        c1[others] = root * si / gap[others]
        c2[others] = root * s[others] / gap[others]
        c1[i] = 0.5 / root

        ui, vi = U[:, i], V[:, i]
        # row j: v_jᵀ ⊗ u_iᵀ, so row j @ vec(δH) = u_iᵀ δH v_j
        rows = np.kron(V.T, ui[None, :])
        Pi1[i * L:(i + 1) * L] = np.kron(vi[None, :], (U * c1) @ U.T) + (U * c2) @ rows
        Pi2[i::n] = (V * c1) @ rows + np.kron(vi[None, :], (V * c2) @ U.T)
    return Pi1, Pi2


@dataclass
class RealizationJacobians:
    """Linear maps from θ-perturbations to (δA, δC, δD) of the realization."""

    Xi: np.ndarray
    map_dA: np.ndarray
    map_dC: np.ndarray
    map_dD: np.ndarray
    A: np.ndarray


def _select_H(block: np.ndarray, ny: int) -> np.ndarray:
    """Prepend zero columns for the vec R0 part of θ."""
    return np.hstack([np.zeros((block.shape[0], ny * ny)), block])


def realization_jacobians(real: Realization,
                          pis: Optional[Tuple[np.ndarray, np.ndarray]] = None
                          ) -> RealizationJacobians:
    """
    Jacobians of the least-squares realization with respect to θ.

    With M = Ω̄ᵀΩ̄, X = M⁻¹Ω̄ᵀ and the shift residual Res = Ω̲ − Ω̄A,

        Ξ = I ⊗ (X Φ2) − Aᵀ ⊗ (X Φ1) + (Resᵀ ⊗ M⁻¹) K_{p,n} (I ⊗ Φ1)

    where Φ1, Φ2 select the upper and lower (m−1) block rows. Only the H part of
    θ reaches A, C and D.

    Raises:
        DimensionMismatch: if m < 2.
    """
    if real.m < 2:
        raise DimensionMismatch("realization Jacobians need m >= 2")
    n, ny = real.n_x, real.n_y
    L = real.m * ny
    p = L - ny
    Pi1, Pi2 = pis if pis is not None else svd_perturbation_maps(real)

    upper, lower = shift_blocks(real)
    M_inv = np.linalg.inv(upper.T @ upper)
    X = M_inv @ upper.T
    A = X @ lower
    residual = lower - upper @ A
    eye_L = np.eye(L)
    Phi1, Phi2 = eye_L[:p], eye_L[ny:]
    Phi3, Phi4 = eye_L[:ny], eye_L[:, :ny]
    I_n = np.eye(n)

    Xi = (kron(I_n, X @ Phi2) - kron(A.T, X @ Phi1)
          + kron(residual.T, M_inv) @ commutation_matrix(p, n) @ kron(I_n, Phi1))
    return RealizationJacobians(
        Xi=Xi,
        map_dA=_select_H(Xi @ Pi1, ny),
        map_dC=_select_H(kron(I_n, Phi3) @ Pi1, ny),
        map_dD=_select_H(kron(Phi4.T, I_n) @ Pi2, ny),
        A=A,
    )


# ---------------------------------------------------------------------------
# Riccati chain
# ---------------------------------------------------------------------------

@dataclass
class DareChain:
    """
    Linearized Riccati maps.

    vec δP ≐ G1 θ,   vec δF ≐ (G2 − G3 G1) θ,   vec δB ≐ (G4 + G5 G1) θ.

    The ``*_dD`` / ``*_dR0`` partials propagate direct shifts of D and R0.
    """

    G1: np.ndarray
    G2: np.ndarray
    G3: np.ndarray
    G4: np.ndarray
    G5: np.ndarray
    dB_dD: np.ndarray
    dB_dR0: np.ndarray
    dF_dD: np.ndarray
    dF_dR0: np.ndarray
    P: np.ndarray

    def __iter__(self):
        return iter((self.G1, self.G2, self.G3, self.G4, self.G5))

    @property
    def map_dB(self) -> np.ndarray:
        return self.G4 + self.G5 @ self.G1

    @property
    def map_dF(self) -> np.ndarray:
        return self.G2 - self.G3 @ self.G1


def dare_perturbation_chain(model: InnovationsModel, cm: CovarianceModel,
                            map_dA: np.ndarray, map_dC: np.ndarray,
                            map_dD: np.ndarray) -> DareChain:
    """
    Differentiate P = APAᵀ + (D − APCᵀ)(R0 − CPCᵀ)⁻¹(D − APCᵀ)ᵀ, Q = R0 − CPCᵀ,
    F = Q^{1/2} and B = (D − APCᵀ)F⁻¹ along θ.

    With Ā = A − KC the closed-loop matrix,

        (I − Ā⊗Ā) vec δP = (I + K_nn)[(ĀP⊗I)δA − (ĀP⊗K)δC + (K⊗I)δD] − (K⊗K)δR0.

    Args:
        model: Innovations model of cm (supplies K, F and B).
        cm: Covariance model at which the maps are evaluated.
        map_dA, map_dC, map_dD: Realization maps from :func:`realization_jacobians`.

    Raises:
        SingularJ1: if the closed loop has a unit-modulus eigenvalue product.
    """
    A, C = cm.A, cm.C
    n, ny = cm.n_x, cm.n_y
    d = map_dA.shape[1]
    if map_dC.shape != (ny * n, d) or map_dD.shape != (n * ny, d) or map_dA.shape[0] != n * n:
        raise DimensionMismatch("realization maps do not match the covariance model")

    P, _, _ = solve_dare(cm.A, cm.D, cm.C, cm.R0)
    K, F, B = model.K, model.F, model.B
    F_inv = np.linalg.inv(F)
    I_n, I_y = np.eye(n), np.eye(ny)
    d0 = ny * ny
    sel_R0 = np.hstack([np.eye(d0), np.zeros((d0, d - d0))])

    A_cl = A - K @ C
    J1 = np.eye(n * n) - kron(A_cl, A_cl)
    if np.linalg.cond(J1) > J1_COND_LIMIT:
        raise SingularJ1(f"I − Ā⊗Ā is singular (cond {np.linalg.cond(J1):.3e})")
    J1_inv = np.linalg.inv(J1)

    sym_nn = np.eye(n * n) + commutation_matrix(n, n)
    sym_yy = np.eye(d0) + commutation_matrix(ny, ny)
    AP = A_cl @ P
    CP = C @ P

    G1 = J1_inv @ (sym_nn @ (kron(AP, I_n) @ map_dA - kron(AP, K) @ map_dC
                             + kron(K, I_n) @ map_dD) - kron(K, K) @ sel_R0)
    sqrt_inv = np.linalg.inv(kron(I_y, F) + kron(F, I_y))
    G2 = sqrt_inv @ (sel_R0 - sym_yy @ kron(CP, I_y) @ map_dC)
    G3 = sqrt_inv @ kron(C, C)
    left = kron(F_inv, I_n)
    right_B = kron(F_inv, B)
    dP_to_dL = kron(F_inv @ C, A)
    G4 = (left @ (map_dD - kron(CP, I_n) @ map_dA
                  - kron(I_y, A @ P) @ commutation_matrix(ny, n) @ map_dC)
          - right_B @ G2)
    G5 = right_B @ G3 - dP_to_dL

    dP_dD = J1_inv @ sym_nn @ kron(K, I_n)
    dP_dR0 = -J1_inv @ kron(K, K)
    dF_dD = -G3 @ dP_dD
    dF_dR0 = sqrt_inv - G3 @ dP_dR0
    dB_dD = left - dP_to_dL @ dP_dD - right_B @ dF_dD
    dB_dR0 = -dP_to_dL @ dP_dR0 - right_B @ dF_dR0
    return DareChain(G1, G2, G3, G4, G5, dB_dD, dB_dR0, dF_dD, dF_dR0, P)


# ---------------------------------------------------------------------------
# error-system gramian
# ---------------------------------------------------------------------------

@dataclass
class GramianPerturbation:
    """Observability gramian P̄ of the zero error system and its first-order map M1."""

    P_bar: np.ndarray
    M1: np.ndarray
    A_bar: np.ndarray
    B_bar: np.ndarray
    lyap_inv_norm: float


def gramian_perturbation(model: InnovationsModel, map_dA: np.ndarray,
                         map_dC: np.ndarray) -> GramianPerturbation:
    """
    P̄ for Ā = diag(A, A), C̄ = [C, −C], and the map vec δP1 ≐ M1 θ induced by
    δĀ = diag(0, δA) and δC̄ = [0, −δC]:

        M1 = −(Āᵀ⊗Āᵀ − I)⁻¹ {[(ĀᵀP̄⊗I)K + (I⊗ĀᵀP̄)](E⊗E) map_dA
                              − [(I⊗C̄ᵀ) + (C̄ᵀ⊗I)K](E⊗I) map_dC},   E = [0; I].
    """
    A, B, C = model.A, model.B, model.C
    n, ny = model.n_x, model.n_y
    n2 = 2 * n
    A_bar = scipy.linalg.block_diag(A, A)
    C_bar = np.hstack([C, -C])
    B_bar = np.vstack([B, B])
    P_bar = solve_dlyap(A_bar, symmetrize(C_bar.T @ C_bar), "observability")

    E = np.vstack([np.zeros((n, n)), np.eye(n)])
    I2 = np.eye(n2)
    AtP = A_bar.T @ P_bar
    lhs = kron(A_bar.T, A_bar.T) - np.eye(n2 * n2)
    from_A = (kron(AtP, I2) @ commutation_matrix(n2, n2) + kron(I2, AtP)) @ kron(E, E) @ map_dA
    from_C = ((kron(I2, C_bar.T) + kron(C_bar.T, I2) @ commutation_matrix(ny, n2))
              @ kron(E, np.eye(ny)) @ map_dC)
    lhs_inv = np.linalg.inv(lhs)
    M1 = -lhs_inv @ (from_A - from_C)
    return GramianPerturbation(P_bar=P_bar, M1=M1, A_bar=A_bar, B_bar=B_bar,
                               lyap_inv_norm=float(np.linalg.norm(lhs_inv, 2)))


# ---------------------------------------------------------------------------
# composed maps
# ---------------------------------------------------------------------------

@dataclass
class PerturbationMaps:
    """All first-order maps from θ, evaluated at ``model`` / ``cm``."""

    Pi1: np.ndarray
    Pi2: np.ndarray
    jacobians: RealizationJacobians
    chain: DareChain
    gramian: GramianPerturbation
    model: InnovationsModel
    cm: CovarianceModel
    m: int

    @property
    def Xi(self) -> np.ndarray:
        return self.jacobians.Xi

    @property
    def map_dA(self) -> np.ndarray:
        return self.jacobians.map_dA

    @property
    def map_dC(self) -> np.ndarray:
        return self.jacobians.map_dC

    @property
    def map_dD(self) -> np.ndarray:
        return self.jacobians.map_dD

    @property
    def map_dB(self) -> np.ndarray:
        return self.chain.map_dB

    @property
    def map_dF(self) -> np.ndarray:
        return self.chain.map_dF

    @property
    def M1(self) -> np.ndarray:
        return self.gramian.M1

    @property
    def dim(self) -> int:
        return self.map_dA.shape[1]


def perturbation_maps(real: Realization, cm: CovarianceModel,
                      model: InnovationsModel) -> PerturbationMaps:
    """Compose Π1/Π2, the realization Jacobians, the Riccati chain and M1."""
    pis = svd_perturbation_maps(real)
    jac = realization_jacobians(real, pis)
    chain = dare_perturbation_chain(model, cm, jac.map_dA, jac.map_dC, jac.map_dD)
    gram = gramian_perturbation(model, jac.map_dA, jac.map_dC)
    return PerturbationMaps(Pi1=pis[0], Pi2=pis[1], jacobians=jac, chain=chain,
                            gramian=gram, model=model, cm=cm, m=real.m)


def true_model_maps(model: InnovationsModel, m: int) -> PerturbationMaps:
    """
    Maps evaluated at the exact statistics of a known model.

    The exact covariances are realized at the true order, so the returned
    ``maps.model`` is the true system in balanced SVD coordinates.
    """
    hankel = build_hankel(model.exact_covariances(2 * m - 1), m)
    real = realize(hankel, model.n_x)
    cm = extract_covariance_model(real, hankel.R0)
    return perturbation_maps(real, cm, covariance_to_innovations(cm))


def parameter_covariance(map_X: np.ndarray, cov: AsymptoticCovariance) -> np.ndarray:
    """Asymptotic covariance M 𝒫 Mᵀ of √N·vec(δX) for vec δX ≐ M θ."""
    if map_X.shape[1] != cov.dim:
        raise DimensionMismatch(f"map has {map_X.shape[1]} columns, covariance is {cov.dim}")
    return symmetrize(map_X @ cov.P @ map_X.T)


# ---------------------------------------------------------------------------
# chi-square calibration and F-norm bounds
# ---------------------------------------------------------------------------

def chi2_cdf(x: float, dof: int) -> float:
    """Chi-square CDF via the regularized lower incomplete gamma P(dof/2, x/2)."""
    if dof < 1:
        raise ValueError("dof must be at least 1")
    return float(gammainc(dof / 2.0, max(x, 0.0) / 2.0))


def chi2_quantile(dof: int, confidence: float) -> float:
    """Inverse of :func:`chi2_cdf`: the χ² value with CDF equal to confidence."""
    if dof < 1:
        raise ValueError("dof must be at least 1")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    return float(2.0 * gammaincinv(dof / 2.0, confidence))


@dataclass
class FNormBounds:
    """Frobenius-norm bounds ‖δX‖_F ≤ eps_X holding jointly at ``confidence``."""

    eps_A: float
    eps_B: float
    eps_C: float
    eps_F: float
    confidence: float
    chi2_quantile: float
    dof: int
    N: int
    eps_P1: float = 0.0
    adjustment_extra: Dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, float]:
        return {"A": self.eps_A, "B": self.eps_B, "C": self.eps_C, "F": self.eps_F}

    def scaled(self, factor: float) -> "FNormBounds":
        """Copy with every eps multiplied by factor."""
        return FNormBounds(self.eps_A * factor, self.eps_B * factor, self.eps_C * factor,
                           self.eps_F * factor, self.confidence, self.chi2_quantile, self.dof,
                           self.N, self.eps_P1 * factor, dict(self.adjustment_extra))


def fnorm_bounds(cov: AsymptoticCovariance, maps: PerturbationMaps, N: int,
                 confidence: float = 0.95,
                 repair_adjust: Optional[Tuple[float, float]] = None) -> FNormBounds:
    """
    eps_X² = (χ²_α / N)·‖𝒫^{1/2} M_Xᵀ M_X 𝒫^{1/2}‖₂ for X ∈ {A, B, C, F} and δP1.

    Args:
        cov: Asymptotic covariance of θ.
        maps: Perturbation maps at the model being certified.
        N: Data length.
        confidence: Joint confidence level.
        repair_adjust: (‖D̂ − D̃‖_F, ‖R̂0 − R̃0‖_F) when repair fired. Their
            first-order effect on B and F is added to eps_B and eps_F.
    """
    if N < 1:
        raise ValueError("N must be positive")
    if maps.dim != cov.dim:
        raise DimensionMismatch(f"maps act on dim {maps.dim}, covariance has dim {cov.dim}")
    dof = cov.dim
    quantile = chi2_quantile(dof, confidence)
    root = cov.sqrt
    factor = np.sqrt(quantile / N)

    def eps(map_X: np.ndarray) -> float:
        return float(factor * np.linalg.norm(map_X @ root, 2))

    extra: Dict[str, float] = {}
    if repair_adjust is not None:
        dD, dR0 = repair_adjust
        ch = maps.chain
        extra["B"] = float(np.linalg.norm(ch.dB_dD, 2) * dD + np.linalg.norm(ch.dB_dR0, 2) * dR0)
        extra["F"] = float(np.linalg.norm(ch.dF_dD, 2) * dD + np.linalg.norm(ch.dF_dR0, 2) * dR0)

    return FNormBounds(
        eps_A=eps(maps.map_dA),
        eps_B=eps(maps.map_dB) + extra.get("B", 0.0),
        eps_C=eps(maps.map_dC),
        eps_F=eps(maps.map_dF) + extra.get("F", 0.0),
        confidence=confidence,
        chi2_quantile=quantile,
        dof=dof,
        N=N,
        eps_P1=eps(maps.M1),
        adjustment_extra=extra,
    )


# ---------------------------------------------------------------------------
# transfer-function variance
# ---------------------------------------------------------------------------

def transfer_function_jacobian(maps: PerturbationMaps, omega: float) -> np.ndarray:
    """Complex map θ → vec δG(e^{iω}) for G = C(zI − A)⁻¹B + F at maps.model."""
    model = maps.model
    n, ny = model.n_x, model.n_y
    R = np.linalg.inv(np.exp(1j * omega) * np.eye(n) - model.A)
    CR = model.C @ R
    RB = R @ model.B
    return (kron(RB.T, CR) @ maps.map_dA + kron(RB.T, np.eye(ny)) @ maps.map_dC
            + kron(np.eye(ny), CR) @ maps.map_dB + maps.map_dF)


def transfer_function_variance(maps: PerturbationMaps, cov: AsymptoticCovariance, N: int,
                               omegas: Sequence[float]) -> np.ndarray:
    """
    Asymptotic variance E‖vec δG(e^{iω})‖² = tr(J 𝒫 Jᴴ)/N at each ω.

    Returns:
        Real array with one variance per frequency.
    """
    variances = []
    for omega in np.atleast_1d(omegas):
        J = transfer_function_jacobian(maps, float(omega))
        variances.append(float(np.sum(np.real((J @ cov.P) * np.conj(J)))) / N)
    return np.array(variances)
