"""
Model-error metrics.

Exact H2 and H∞ norms of the error system G_e − G̃_e, the relative errors
used to score identification runs, and plain-text report formatting.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
import scipy.linalg

from ssicert.core.errors import DimensionMismatch
from ssicert.core.linalg import h2_norm, hinf_norm
from ssicert.core.models import InnovationsModel, TransferFunction
from ssicert.utils.config import load_settings


@dataclass(frozen=True, eq=False)
class ErrorSystem:
    """
    Realization of G_e − G̃_e:

        𝒜 = diag(A, Ã),  ℬ = [B; B̃],  𝒞 = [C, −C̃],  ℱ = F − F̃.
    """

    true_model: InnovationsModel
    model_hat: InnovationsModel

    def __post_init__(self):
        if self.true_model.n_y != self.model_hat.n_y:
            raise DimensionMismatch("models have different output dimensions")

    @property
    def A(self) -> np.ndarray:
        return scipy.linalg.block_diag(self.true_model.A, self.model_hat.A)

    @property
    def B(self) -> np.ndarray:
        return np.vstack([self.true_model.B, self.model_hat.B])

    @property
    def C(self) -> np.ndarray:
        return np.hstack([self.true_model.C, -self.model_hat.C])

    @property
    def F(self) -> np.ndarray:
        return self.true_model.F - self.model_hat.F

    @property
    def is_stable(self) -> bool:
        return self.true_model.is_stable and self.model_hat.is_stable

    def transfer_function(self) -> TransferFunction:
        return TransferFunction(self.A, self.B, self.C, self.F)

    def frequency_response(self, n_points: int = 512) -> Tuple[np.ndarray, np.ndarray]:
        """(ω, σ_max(G_e − G̃_e)(e^{iω})) on n_points + 1 frequencies in [0, π]."""
        omegas = np.linspace(0.0, np.pi, n_points + 1)
        values = self.transfer_function().evaluate(omegas)
        return omegas, np.linalg.norm(values, ord=2, axis=(1, 2))


def exact_error_norms(true_model: InnovationsModel, model_hat: InnovationsModel,
                      rel_tol: Optional[float] = None) -> Tuple[float, float]:
    """
    Exact (‖G_e − G̃_e‖_H2, ‖G_e − G̃_e‖_∞).

    Raises:
        UnstableMatrix: if either model is unstable.
    """
    G = ErrorSystem(true_model, model_hat).transfer_function()
    if rel_tol is None:
        rel_tol = load_settings().hinf_rel_tol
    return h2_norm(G), hinf_norm(G, rel_tol)


def model_norms(model: InnovationsModel, rel_tol: Optional[float] = None) -> Tuple[float, float]:
    """(‖G_e‖_H2, ‖G_e‖_∞) of a single model."""
    G = model.transfer_function()
    if rel_tol is None:
        rel_tol = load_settings().hinf_rel_tol
    return h2_norm(G), hinf_norm(G, rel_tol)


def relative_errors(true_model: InnovationsModel, model_hat: InnovationsModel,
                    true_norms: Optional[Tuple[float, float]] = None) -> Dict[str, float]:
    """
    E2 = ‖G_e − G̃_e‖_H2 / ‖G_e‖_H2 and E∞ = ‖G_e − G̃_e‖_∞ / ‖G_e‖_∞.

    Args:
        true_model: Data-generating model.
        model_hat: Identified model.
        true_norms: Precomputed (‖G_e‖_H2, ‖G_e‖_∞), reused across runs.

    Returns:
        Dictionary with E2, Einf and the absolute errors h2_error, hinf_error.
    """
    h2_true, hinf_true = true_norms if true_norms is not None else model_norms(true_model)
    h2_err, hinf_err = exact_error_norms(true_model, model_hat)
    return {
        'E2': h2_err / h2_true if h2_true > 0 else float('inf'),
        'Einf': hinf_err / hinf_true if hinf_true > 0 else float('inf'),
        'h2_error': h2_err,
        'hinf_error': hinf_err,
    }


def format_bound_report(report: Dict[str, Any]) -> str:
    """
    Format a bound report dictionary (see BoundReport.as_dict) as text.

    Args:
        report: Report dictionary.

    Returns:
        Formatted string
    """
    eps = report.get('eps', {})
    lines = [
        "=" * 60,
        "MODEL ERROR CERTIFICATE",
        "=" * 60,
        "",
        f"Confidence:            {report['confidence'] * 100:.2f}%  "
        f"(chi2 = {report['chi2_quantile']:.2f}, dof = {report['dof']})",
        f"Data size N:           {report['N']:,}",
        "",
        "📐 Parameter bounds (Frobenius norm):",
    ]
    for key in ('A', 'B', 'C', 'F', 'P1', 'P2'):
        if key in eps:
            lines.append(f"  eps_{key:<3}              {eps[key]:.6g}")
    lines.extend([
        "",
        "📊 Error-system bounds:",
        f"  H2:                  {report['h2_bound']:.6g}",
        f"  H∞ (perturbative):   {report['hinf_bound_perturbative']:.6g}",
        f"  H∞ (robust LMI):     {report['hinf_bound_lmi']:.6g}",
    ])
    if 'exact' in report:
        exact = report['exact']
        lines.extend([
            "",
            "🎯 Exact errors (true model known):",
            f"  H2:                  {exact['h2']:.6g}",
            f"  H∞:                  {exact['hinf']:.6g}",
        ])
        for name, covered in report.get('coverage', {}).items():
            lines.append(f"  {name:<20} {'✓ covered' if covered else '✗ violated'}")
    lines.extend(["", "=" * 60])
    return "\n".join(lines)
