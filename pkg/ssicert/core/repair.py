"""
Validity guarantees for identified covariance models.

Three steps turn a raw estimate into a usable innovations model:

1. ``stabilize``: project Ã onto the Schur-stable set with a convex LMI.
2. ``check_positive_real``: decide whether the covariance model admits a
   positive definite Riccati solution (non-empty positive-real set).
3. ``repair``: when it does not, find the closest gap matrix Φ ⪰ 0 and adjust
   D and R0 so the Riccati equation becomes solvable. Â and C̃ stay fixed.

``full_pipeline`` chains identification, stabilization and repair so a stable
innovations model with positive definite Q is always returned.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import cvxpy as cp
import numpy as np

from ssicert.core.errors import (
    DareInfeasible,
    PostRepairDareFailure,
    SingularQ,
    SolverFailure,
    UnstableMatrix,
)
from ssicert.core.identification import covariance_to_innovations, identify_covariance_model
from ssicert.core.linalg import (
    STABILITY_MARGIN,
    as_matrix,
    solve_dare,
    solve_dlyap,
    spectral_radius,
    symmetrize,
)
from ssicert.core.models import (
    CovarianceModel,
    HankelEstimate,
    InnovationsModel,
    Realization,
    TimeSeries,
)
from ssicert.core.sdp import SdpProblem, psd, solve_sdp

logger = logging.getLogger(__name__)

STABILIZE_MARGIN = 1e-6
NORM_CHOICES = ("two_norm", "f_norm")


# ---------------------------------------------------------------------------
# stability projection
# ---------------------------------------------------------------------------

def stabilize(A_tilde: np.ndarray, margin: float = STABILIZE_MARGIN) -> np.ndarray:
    """
    Closest Schur-stable matrix in the weighted sense min ‖(Â − Ã)W‖_F.

    The bilinear program is solved in Z = ÂW with W ⪰ I and
    [[(1−μ)W, Z], [Zᵀ, (1−μ)W]] ⪰ 0, which gives ρ(Â) ≤ 1 − μ for Â = Z W⁻¹.
    A stable input is returned unchanged.

    Raises:
        SolverFailure: if the program cannot be solved.
    """
    A_tilde = as_matrix(A_tilde, "A")
    rho = spectral_radius(A_tilde)
    if rho < 1.0 - STABILITY_MARGIN:
        return A_tilde

    n = A_tilde.shape[0]
    W = cp.Variable((n, n), symmetric=True)
    Z = cp.Variable((n, n))
    shrink = 1.0 - margin
    prob = SdpProblem(
        objective=cp.Minimize(cp.norm(Z - A_tilde @ W, "fro")),
        constraints=[psd(W - np.eye(n)), psd(cp.bmat([[shrink * W, Z], [Z.T, shrink * W]]))],
        variables={"W": W, "Z": Z},
        name="stabilize",
    )
    result = solve_sdp(prob)
    if not result.ok:
        raise SolverFailure(f"stability projection failed ({result.status})")

    Wv = symmetrize(result.values["W"])
    A_hat = np.linalg.solve(Wv, result.values["Z"].T).T
    rho_hat = spectral_radius(A_hat)
    if rho_hat >= 1.0 - STABILITY_MARGIN:
        # solver tolerance left the pole on the boundary
        A_hat = A_hat * (shrink / rho_hat)
        rho_hat = spectral_radius(A_hat)
    logger.info("stabilization fired: rho %.6f -> %.6f, |dA|_F=%.3e",
                rho, rho_hat, np.linalg.norm(A_hat - A_tilde))
    return A_hat


# ---------------------------------------------------------------------------
# positive-real set
# ---------------------------------------------------------------------------

def _gap_matrix(P, A, D, C, R0):
    """[[P − APAᵀ, D − APCᵀ], [(D − APCᵀ)ᵀ, R0 − CPCᵀ]] for numeric or cvxpy P."""
    L = D - A @ P @ C.T
    if isinstance(P, cp.Expression):
        return cp.bmat([[P - A @ P @ A.T, L], [L.T, R0 - C @ P @ C.T]])
    return np.block([[P - A @ P @ A.T, L], [L.T, R0 - C @ P @ C.T]])


def _strict_delta(R0: np.ndarray) -> float:
    return 1e-8 * (1.0 + np.linalg.norm(R0, 2))


def in_positive_real_set(cm: CovarianceModel, P: np.ndarray, tol: float = 1e-9) -> bool:
    """True when P ≻ 0 and the gap matrix of (cm, P) is PSD up to tol·scale."""
    P = symmetrize(as_matrix(P, "P"))
    if np.min(np.linalg.eigvalsh(P)) <= 0:
        return False
    gap = symmetrize(_gap_matrix(P, cm.A, cm.D, cm.C, cm.R0))
    scale = 1.0 + np.max(np.abs(gap))
    return bool(np.min(np.linalg.eigvalsh(gap)) >= -tol * scale)


@dataclass
class PositiveRealCheck:
    """Outcome of :func:`check_positive_real`."""

    valid: bool
    P: Optional[np.ndarray] = None
    method: str = "dare"
    margin: Optional[float] = None

    def __bool__(self) -> bool:
        return bool(self.valid)


def check_positive_real(cm: CovarianceModel, tol: float = 1e-9) -> PositiveRealCheck:
    """
    Decide whether the covariance model is positive real.

    The Riccati solver is tried first. If it fails, the largest margin t with
    P ⪰ δI and gap(P) ⪰ tI is computed by SDP; the model is valid iff t ≥ −tol.

    Raises:
        UnstableMatrix: if cm.A is not stable.
        SolverFailure: if the SDP backend fails.
    """
    rho = spectral_radius(cm.A)
    if rho >= 1.0 - STABILITY_MARGIN:
        raise UnstableMatrix(f"check_positive_real needs a stable A (rho={rho:.6f})")
    try:
        P, _, _ = solve_dare(cm.A, cm.D, cm.C, cm.R0)
        return PositiveRealCheck(True, P, "dare")
    except (DareInfeasible, SingularQ) as exc:
        logger.debug("positive-real check: Riccati route failed (%s), using SDP", exc)

    n, ny = cm.n_x, cm.n_y
    P = cp.Variable((n, n), symmetric=True)
    t = cp.Variable()
    gap = _gap_matrix(P, cm.A, cm.D, cm.C, cm.R0)
    prob = SdpProblem(
        objective=cp.Maximize(t),
        constraints=[psd(P, _strict_delta(cm.R0)), psd(gap - t * np.eye(n + ny)), t <= 1.0],
        variables={"P": P, "t": t},
        name="positive_real",
    )
    result = solve_sdp(prob)
    if not result.ok:
        raise SolverFailure(f"positive-real feasibility program failed ({result.status})")
    margin = float(result.values["t"])
    valid = margin >= -tol * (1.0 + np.linalg.norm(cm.R0, 2))
    return PositiveRealCheck(valid, symmetrize(result.values["P"]) if valid else None, "sdp", margin)


# ---------------------------------------------------------------------------
# repair
# ---------------------------------------------------------------------------

@dataclass
class RepairOutcome:
    """
    Result of the positive-real repair program.

    ``model`` is the adjusted covariance model (Â, D̂, C̃, R̂0) and
    ``innovations`` its Riccati-derived innovations model.
    """

    P_bar: np.ndarray
    Phi11: np.ndarray
    Phi12: np.ndarray
    Phi22: np.ndarray
    lam: float
    D_hat: np.ndarray
    R0_hat: np.ndarray
    delta_D: np.ndarray
    delta_R0: np.ndarray
    model: CovarianceModel
    innovations: InnovationsModel
    norm_choice: str = "two_norm"
    delta: float = 0.0

    @property
    def adjustment_norms(self) -> Tuple[float, float]:
        """(‖D̂ − D̃‖_F, ‖R̂0 − R̃0‖_F)."""
        return (float(np.linalg.norm(self.delta_D, "fro")),
                float(np.linalg.norm(self.delta_R0, "fro")))

    @property
    def Phi(self) -> np.ndarray:
        return np.block([[self.Phi11, self.Phi12], [self.Phi12.T, self.Phi22]])


def _repair_program(cm: CovarianceModel, norm_choice: str, delta: float) -> SdpProblem:
    n, ny = cm.n_x, cm.n_y
    P = cp.Variable((n, n), symmetric=True)
    Phi11 = cp.Variable((n, n), symmetric=True)
    Phi12 = cp.Variable((n, ny))
    Phi22 = cp.Variable((ny, ny), symmetric=True)
    Phi = cp.bmat([[Phi11, Phi12], [Phi12.T, Phi22]])
    E = _gap_matrix(P, cm.A, cm.D, cm.C, cm.R0) - Phi
    E = (E + E.T) / 2

    constraints = [psd(Phi, delta), psd(P, delta)]
    variables = {"P": P, "Phi11": Phi11, "Phi12": Phi12, "Phi22": Phi22}
    if norm_choice == "two_norm":
        size = n + ny
        lam = cp.Variable()
        constraints.append(psd(cp.bmat([[lam * np.eye(size), E], [E.T, np.eye(size)]])))
        objective = cp.Minimize(lam)
        variables["lam"] = lam
    else:
        objective = cp.Minimize(cp.norm(E, "fro"))
    return SdpProblem(objective, constraints, variables, name=f"repair[{norm_choice}]")


def _repair_once(cm: CovarianceModel, norm_choice: str, delta: float) -> RepairOutcome:
    result = solve_sdp(_repair_program(cm, norm_choice, delta)).require("repair")
    v = result.values
    Phi11 = symmetrize(v["Phi11"])
    Phi12 = v["Phi12"]
    Phi22 = symmetrize(v["Phi22"])
    lam = float(v["lam"]) if "lam" in v else float(result.objective)

    P_bar = solve_dlyap(cm.A, Phi11, "controllability")
    D_hat = cm.A @ P_bar @ cm.C.T + Phi12
    R0_hat = symmetrize(cm.C @ P_bar @ cm.C.T + Phi22)
    repaired = cm.replace(D=D_hat, R0=R0_hat)

    _, Q, K = solve_dare(repaired.A, repaired.D, repaired.C, repaired.R0)
    innovations = InnovationsModel(A=repaired.A, K=K, Q=Q, C=repaired.C)
    return RepairOutcome(
        P_bar=P_bar, Phi11=Phi11, Phi12=Phi12, Phi22=Phi22, lam=max(lam, 0.0),
        D_hat=D_hat, R0_hat=R0_hat, delta_D=D_hat - cm.D, delta_R0=R0_hat - cm.R0,
        model=repaired, innovations=innovations, norm_choice=norm_choice, delta=delta,
    )


def repair(cm: CovarianceModel, norm_choice: str = "two_norm") -> RepairOutcome:
    """
    Repair a covariance model so its Riccati equation has a valid solution.

    Solves min ‖gap(P) − Φ‖ over P ≻ 0, Φ ⪰ 0 (2-norm through the Schur form
    [[λI, E], [Eᵀ, I]] ⪰ 0, or Frobenius), then sets

        P̄ = Â P̄ Âᵀ + Φ11,   D̂ = Â P̄ C̃ᵀ + Φ12,   R̂0 = C̃ P̄ C̃ᵀ + Φ22.

    Args:
        cm: Covariance model with stable A.
        norm_choice: 'two_norm' (default) or 'f_norm'.

    Raises:
        UnstableMatrix: if cm.A is not stable.
        SolverFailure: if the SDP fails.
        PostRepairDareFailure: if the repaired model still defeats the Riccati solver.
    """
    if norm_choice not in NORM_CHOICES:
        raise ValueError(f"norm_choice must be one of {NORM_CHOICES}, got {norm_choice!r}")
    rho = spectral_radius(cm.A)
    if rho >= 1.0 - STABILITY_MARGIN:
        raise UnstableMatrix(f"repair needs a stable A; run stabilize first (rho={rho:.6f})")

    delta = _strict_delta(cm.R0)
    try:
        outcome = _repair_once(cm, norm_choice, delta)
    except (DareInfeasible, SingularQ) as exc:
        logger.warning("post-repair Riccati failed (%s); retrying with slack x1e3", exc)
        try:
            outcome = _repair_once(cm, norm_choice, delta * 1e3)
        except (DareInfeasible, SingularQ) as exc2:
            raise PostRepairDareFailure(f"repaired model is still not positive real: {exc2}") from exc2

    dD, dR0 = outcome.adjustment_norms
    logger.info("repair fired (%s): lambda=%.3e, |dD|_F=%.3e, |dR0|_F=%.3e",
                norm_choice, outcome.lam, dD, dR0)
    return outcome


# ---------------------------------------------------------------------------
# end-to-end
# ---------------------------------------------------------------------------

@dataclass
class IdentificationResult:
    """Identified model together with everything needed to certify it."""

    model: InnovationsModel
    raw_model: CovarianceModel
    covariance_model: CovarianceModel
    hankel: HankelEstimate
    realization: Realization
    N: int
    stabilized: bool = False
    repair: Optional[RepairOutcome] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def repaired(self) -> bool:
        return self.repair is not None

    @property
    def m(self) -> int:
        return self.hankel.m


def full_pipeline(ts: TimeSeries, m: int, n_x: int,
                  norm_choice: str = "two_norm") -> IdentificationResult:
    """
    Identify an innovations model that is always stable with Q ≻ 0.

    Args:
        ts: Output time series.
        m: Hankel block depth.
        n_x: Model order.
        norm_choice: Norm used if repair fires.

    Returns:
        IdentificationResult with stabilization/repair flags and adjustment sizes.

    Raises:
        InsufficientData, RankDeficient, IllConditionedShift: for unusable input.
        SolverFailure: if stabilization or repair cannot be solved.
    """
    hankel, real, raw = identify_covariance_model(ts, m, n_x)
    rho_raw = spectral_radius(raw.A)

    stabilized = rho_raw >= 1.0 - STABILITY_MARGIN
    cm = raw.replace(A=stabilize(raw.A)) if stabilized else raw

    outcome = None
    try:
        model = covariance_to_innovations(cm)
    except (DareInfeasible, SingularQ) as exc:
        logger.info("Riccati failed on identified model (%s); repairing", exc)
        outcome = repair(cm, norm_choice)
        model = outcome.innovations
        cm = outcome.model

    diagnostics = {
        "rho_raw": rho_raw,
        "rho": spectral_radius(model.A),
        "stabilization_shift": float(np.linalg.norm(cm.A - raw.A, "fro")),
        "repair_lambda": outcome.lam if outcome else 0.0,
        "adjust_D": outcome.adjustment_norms[0] if outcome else 0.0,
        "adjust_R0": outcome.adjustment_norms[1] if outcome else 0.0,
        "singular_values": real.singular_values.tolist(),
    }
    return IdentificationResult(
        model=model, raw_model=raw, covariance_model=cm, hankel=hankel, realization=real,
        N=ts.N, stabilized=stabilized, repair=outcome, diagnostics=diagnostics,
    )
