"""
Structured linear algebra and control solvers.

vec/Kronecker calculus, commutation matrices, discrete Lyapunov and Riccati
solvers, spectral densities and H2/H∞ norms. Everything here is a pure
function of its inputs.

Conventions:
    vec(M)  column-major stacking, so kron(A, B) @ vec(X) == vec(B @ X @ A.T)
    dlyap   'controllability':  X = A X Aᵀ + Q
            'observability':    X = Aᵀ X A + Q
"""

import logging
from typing import TYPE_CHECKING, Tuple

import cvxpy as cp
import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from ssicert.core.errors import (
    DareInfeasible,
    DimensionMismatch,
    NonSymmetricInput,
    SingularQ,
    SolverFailure,
    UnstableMatrix,
)
from ssicert.core.sdp import SdpProblem, psd, solve_sdp

if TYPE_CHECKING:
    from ssicert.core.models import FrequencyGrid, InnovationsModel, TransferFunction

logger = logging.getLogger(__name__)

STABILITY_MARGIN = 1e-10
SYMMETRY_TOL = 1e-12

ZERO_GAIN_TOL = 1e-12
DARE_TOL = 1e-12
DARE_MAX_ITER = 200
_FIXED_POINT_MAX_ITER = 5000


# ---------------------------------------------------------------------------
# vec / Kronecker calculus
# ---------------------------------------------------------------------------

def vec(M: np.ndarray) -> np.ndarray:
    """Stack the columns of M top to bottom."""
    return np.asarray(M).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec` for a rows×cols matrix."""
    return np.asarray(v).reshape((rows, cols), order="F")


def kron(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product A ⊗ B."""
    return np.kron(np.atleast_2d(A), np.atleast_2d(B))


def commutation_matrix(p: int, q: int) -> np.ndarray:
    """
    The (pq)×(pq) permutation K_{p,q} with K_{p,q} @ vec(M) == vec(M.T) for p×q M.

    Args:
        p: Row dimension of the matrices being vectorized.
        q: Column dimension.
    """
    if p < 1 or q < 1:
        raise DimensionMismatch(f"commutation_matrix needs p, q >= 1, got ({p}, {q})")
    index = np.arange(p * q).reshape((p, q), order="F")
    return np.eye(p * q)[vec(index.T)]


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------

def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Coerce scalars and vectors to a float 2-D array."""
    arr = np.atleast_2d(np.asarray(M, dtype=float))
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def symmetrize(M: np.ndarray) -> np.ndarray:
    return (M + M.T) / 2


def is_symmetric(M: np.ndarray, tol: float = SYMMETRY_TOL) -> bool:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    scale = 1.0 + (np.max(np.abs(M)) if M.size else 0.0)
    return bool(np.max(np.abs(M - M.T), initial=0.0) <= tol * scale)


def check_symmetric(M: np.ndarray, name: str) -> np.ndarray:
    """Return the symmetrized matrix, or raise NonSymmetricInput."""
    if not is_symmetric(M):
        raise NonSymmetricInput(f"{name} is not symmetric "
                                f"(max asymmetry {np.max(np.abs(M - M.T)):.3e})")
    return symmetrize(M)


def spectral_radius(A: np.ndarray) -> float:
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def check_stable(A: np.ndarray, name: str = "A") -> float:
    """Return ρ(A) or raise UnstableMatrix when ρ(A) ≥ 1 − 1e-10."""
    rho = spectral_radius(A)
    if rho >= 1.0 - STABILITY_MARGIN:
        raise UnstableMatrix(f"{name} is not Schur stable (spectral radius {rho:.12f})")
    return rho


def sqrtm_psd(M: np.ndarray) -> np.ndarray:
    """Principal symmetric square root of a symmetric PSD matrix, eigenvalues clipped at 0."""
    M = symmetrize(as_matrix(M))
    if M.size == 0:
        return M.copy()
    w, V = np.linalg.eigh(M)
    root = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T
    return symmetrize(root)


# ---------------------------------------------------------------------------
# Lyapunov
# ---------------------------------------------------------------------------

def solve_dlyap(A: np.ndarray, Q: np.ndarray, form: str = "controllability") -> np.ndarray:
    """
    Solve a discrete Lyapunov equation.

    Args:
        A: Schur-stable square matrix.
        Q: Symmetric right-hand side.
        form: 'controllability' for X = A X Aᵀ + Q, 'observability' for X = Aᵀ X A + Q.

    Returns:
        Symmetric solution X.

    Raises:
        UnstableMatrix: if ρ(A) ≥ 1 − 1e-10.
        NonSymmetricInput: if Q is not symmetric.
    """
    A = as_matrix(A, "A")
    Q = as_matrix(Q, "Q")
    if A.shape[0] != A.shape[1] or Q.shape != A.shape:
        raise DimensionMismatch(f"solve_dlyap: A {A.shape} and Q {Q.shape} do not match")
    Q = check_symmetric(Q, "Q")
    check_stable(A)

    if form == "controllability":
        X = scipy.linalg.solve_discrete_lyapunov(A, Q)
    elif form == "observability":
        X = scipy.linalg.solve_discrete_lyapunov(A.T, Q)
    else:
        raise ValueError(f"unknown Lyapunov form {form!r}")
    return symmetrize(np.real(X))


# ---------------------------------------------------------------------------
# Riccati
# ---------------------------------------------------------------------------

class _NotConverged(Exception):
    pass


def _dare_residual(P, A, D, C, R0) -> np.ndarray:
    L = D - A @ P @ C.T
    Q = R0 - C @ P @ C.T
    return A @ P @ A.T + L @ np.linalg.solve(Q, L.T) - P


def _check_innovations_psd(P, C, R0, scale) -> None:
    # Iterates increase monotonically towards the minimal solution, so an
    # indefinite R0 − CPCᵀ at any step rules out every solution.
    Q = symmetrize(R0 - C @ P @ C.T)
    if np.min(np.linalg.eigvalsh(Q)) < -1e-8 * scale:
        raise DareInfeasible("R0 − CPCᵀ lost positive semidefiniteness during iteration")


def _doubling(F0, S, M, C, R0, tol, max_iter, scale) -> np.ndarray:
    """
    Structure-preserving doubling for X = F0 X (I − S X)^{-1} F0ᵀ + M.

    H_k equals the 2^k-th fixed-point iterate started from X = 0.
    """
    n = F0.shape[0]
    I = np.eye(n)
    Ak, Gk, Hk = F0.T.copy(), -S, M.copy()
    for it in range(max_iter):
        W = I + Gk @ Hk
        try:
            WA = np.linalg.solve(W, Ak)
            WG = np.linalg.solve(W, Gk)
        except np.linalg.LinAlgError as exc:
            raise _NotConverged(f"singular doubling pencil at step {it}") from exc
        H_next = symmetrize(Hk + Ak.T @ Hk @ WA)
        G_next = symmetrize(Gk + Ak @ WG @ Ak.T)
        A_next = Ak @ WA
        if not np.all(np.isfinite(H_next)) or np.linalg.norm(H_next) > 1e14 * scale:
            raise _NotConverged(f"doubling diverged at step {it}")
        _check_innovations_psd(H_next, C, R0, scale)
        step = np.linalg.norm(H_next - Hk)
        logger.debug("doubling step %d: |dH|=%.3e", it, step)
        Ak, Gk, Hk = A_next, G_next, H_next
        if step <= tol * (1.0 + np.linalg.norm(Hk)):
            return Hk
    raise _NotConverged(f"doubling did not converge in {max_iter} steps")


def _fixed_point(A, D, C, R0, tol, max_iter, scale) -> np.ndarray:
    P = np.zeros_like(A)
    for it in range(max_iter):
        L = D - A @ P @ C.T
        Q = symmetrize(R0 - C @ P @ C.T)
        try:
            P_next = symmetrize(A @ P @ A.T + L @ np.linalg.solve(Q, L.T))
        except np.linalg.LinAlgError as exc:
            raise DareInfeasible(f"R0 − CPCᵀ singular at fixed-point step {it}") from exc
        if not np.all(np.isfinite(P_next)) or np.linalg.norm(P_next) > 1e14 * scale:
            raise DareInfeasible(f"fixed-point iteration diverged at step {it}")
        _check_innovations_psd(P_next, C, R0, scale)
        step = np.linalg.norm(P_next - P)
        P = P_next
        if step <= tol * (1.0 + np.linalg.norm(P)):
            return P
    raise DareInfeasible(f"fixed-point iteration did not converge in {max_iter} steps")


def solve_dare(A: np.ndarray, D: np.ndarray, C: np.ndarray, R0: np.ndarray,
               tol: float = DARE_TOL, max_iter: int = DARE_MAX_ITER
               ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Solve the stochastic-realization Riccati equation

        P = A P Aᵀ + (D − A P Cᵀ)(R0 − C P Cᵀ)^{-1}(D − A P Cᵀ)ᵀ

    for its minimal solution, and recover Q = R0 − C P Cᵀ and K = (D − A P Cᵀ)Q^{-1}.

    Doubling is tried first; the plain fixed-point recursion is the fallback.

    Returns:
        (P, Q, K)

    Raises:
        DareInfeasible: the covariance model is not positive real.
        SingularQ: Q is numerically singular.
    """
    A = as_matrix(A, "A")
    D = as_matrix(D, "D")
    C = as_matrix(C, "C")
    R0 = as_matrix(R0, "R0")
    n, ny = A.shape[0], R0.shape[0]
    if A.shape != (n, n) or D.shape != (n, ny) or C.shape != (ny, n) or R0.shape != (ny, ny):
        raise DimensionMismatch(
            f"solve_dare: inconsistent shapes A{A.shape} D{D.shape} C{C.shape} R0{R0.shape}")
    R0 = check_symmetric(R0, "R0")
    w_r0 = np.linalg.eigvalsh(R0)
    if w_r0[0] <= 0:
        raise DareInfeasible(f"R0 is not positive definite (min eigenvalue {w_r0[0]:.3e})")
    scale = 1.0 + float(w_r0[-1])

    R0_inv = np.linalg.inv(R0)
    F0 = A - D @ R0_inv @ C
    S = symmetrize(C.T @ R0_inv @ C)
    M = symmetrize(D @ R0_inv @ D.T)

    try:
        P = _doubling(F0, S, M, C, R0, tol, max_iter, scale)
    except _NotConverged as exc:
        logger.warning("doubling failed (%s), falling back to fixed-point iteration", exc)
        P = _fixed_point(A, D, C, R0, tol, _FIXED_POINT_MAX_ITER, scale)

    w_p = np.linalg.eigvalsh(P)
    if w_p[0] < -1e-8 * (1.0 + abs(w_p[-1])):
        raise DareInfeasible(f"Riccati solution is indefinite (min eigenvalue {w_p[0]:.3e})")

    Q = symmetrize(R0 - C @ P @ C.T)
    w_q = np.linalg.eigvalsh(Q)
    if w_q[0] < -1e-8:
        raise DareInfeasible(f"innovations covariance has eigenvalue {w_q[0]:.3e} < 0")
    if w_q[0] <= 1e-13 * max(1.0, w_q[-1]):
        raise SingularQ(f"innovations covariance is singular (eigenvalues {w_q})")

    residual = np.max(np.abs(_dare_residual(P, A, D, C, R0)))
    if residual > 1e-8 * (1.0 + np.max(np.abs(P))):
        raise DareInfeasible(f"Riccati residual {residual:.3e} exceeds tolerance")

    K = np.linalg.solve(Q, (D - A @ P @ C.T).T).T
    return P, Q, K


# ---------------------------------------------------------------------------
# frequency domain and norms
# ---------------------------------------------------------------------------

def spectral_density(model: "InnovationsModel", grid: "FrequencyGrid") -> np.ndarray:
    """
    Output spectrum S_y(ω) = G_e(e^{iω}) G_e(e^{iω})ᴴ on a frequency grid.

    Returns:
        Complex array of shape (n_points, n_y, n_y).
    """
    check_stable(model.A)
    G = model.transfer_function().evaluate(grid.omegas)
    S = G @ np.conj(np.swapaxes(G, 1, 2))
    return (S + np.conj(np.swapaxes(S, 1, 2))) / 2


def h2_norm(G: "TransferFunction") -> float:
    """‖G‖_H2 from the observability gramian: tr(DffᵀDff + Bᵀ W_o B)."""
    if G.A.size == 0:
        return float(np.linalg.norm(G.Dff, "fro"))
    Wo = solve_dlyap(G.A, symmetrize(G.C.T @ G.C), "observability")
    value = np.trace(G.Dff.T @ G.Dff) + np.trace(G.B.T @ Wo @ G.B)
    return float(np.sqrt(max(value, 0.0)))


def peak_gain(G: "TransferFunction", n_points: int = 512) -> Tuple[float, float]:
    """
    Largest singular value of G(e^{iω}) over [0, π], refined around the grid maximum.

    Returns:
        (gain, omega) with gain a lower bound on ‖G‖_∞.
    """
    omegas = np.linspace(0.0, np.pi, n_points + 1)
    gains = np.linalg.norm(G.evaluate(omegas), ord=2, axis=(1, 2))
    k = int(np.argmax(gains))
    best, best_w = float(gains[k]), float(omegas[k])
    lo, hi = omegas[max(k - 1, 0)], omegas[min(k + 1, n_points)]
    if hi > lo:
        res = minimize_scalar(
            lambda w: -np.linalg.norm(G.evaluate(np.array([w]))[0], 2),
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-10},
        )
        if -res.fun > best:
            best, best_w = float(-res.fun), float(res.x)
    return best, best_w


class _BoundedRealOracle:
    """
    Feasibility of the bounded-real LMI at a given γ:

        [A B; C D]ᵀ diag(P, I) [A B; C D] − diag(P, γ² I) ≺ 0,   P ≻ 0.

    The problem is built once with γ² as a parameter and re-solved per query.
    """

    def __init__(self, G: "TransferFunction"):
        n, nu = G.B.shape
        ny = G.C.shape[0]
        self.gamma_sq = cp.Parameter(nonneg=True)
        P = cp.Variable((n, n), symmetric=True)
        t = cp.Variable()
        M = np.block([[G.A, G.B], [G.C, G.Dff]])
        weight = cp.bmat([[P, np.zeros((n, ny))], [np.zeros((ny, n)), np.eye(ny)]])
        target = cp.bmat([[P, np.zeros((n, nu))], [np.zeros((nu, n)), self.gamma_sq * np.eye(nu)]])
        lmi = target - M.T @ weight @ M
        self.problem = SdpProblem(
            objective=cp.Maximize(t),
            constraints=[psd(lmi - t * np.eye(n + nu)), psd(P - t * np.eye(n)), t <= 1.0],
            variables={"P": P, "t": t},
            name="bounded_real",
        )

    def feasible(self, gamma: float) -> bool:
        self.gamma_sq.value = gamma ** 2
        result = solve_sdp(self.problem)
        if result.status == "infeasible":
            return False
        if not result.ok:
            raise SolverFailure(f"bounded-real oracle failed at gamma={gamma:.6g}")
        return bool(result.values["t"] > 1e-9)


def hinf_norm(G: "TransferFunction", rel_tol: float = 1e-4) -> float:
    """
    ‖G‖_∞ by bisection on γ, each step certified by the bounded-real LMI.

    The bracket is seeded with the refined frequency-grid peak, which is a
    lower bound; the returned value is the smallest feasible γ found, so it
    lies within rel_tol above the true norm.

    Raises:
        UnstableMatrix: if G is not stable.
        SolverFailure: if the LMI oracle fails.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    check_stable(G.A)
    static_gain = float(np.linalg.norm(G.Dff, 2)) if G.Dff.size else 0.0
    if G.A.size == 0 or not np.any(G.B) or not np.any(G.C):
        return static_gain

    lo, _ = peak_gain(G)
    scale = np.linalg.norm(G.B, 2) * np.linalg.norm(G.C, 2) + static_gain
    if lo <= ZERO_GAIN_TOL * scale:
        # transfer is zero up to rounding, e.g. a model compared with itself
        return float(lo)
    lo = max(lo, static_gain)
    oracle = _BoundedRealOracle(G)

    hi = lo * (1.0 + rel_tol)
    growth = 0
    while not oracle.feasible(hi):
        lo, hi = hi, 2.0 * hi
        growth += 1
        if growth > 60:
            raise SolverFailure("bounded-real bisection could not find a feasible gamma")

    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if oracle.feasible(mid):
            hi = mid
        else:
            lo = mid
    logger.debug("hinf_norm: [%.8g, %.8g]", lo, hi)
    return float(hi)
