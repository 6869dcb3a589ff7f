"""
Unit Tests for Stabilization, Positive-Real Checks and Repair
"""

import pytest
import numpy as np
import sys
from pathlib import Path

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from ssicert.core.errors import UnstableMatrix
from ssicert.core.linalg import solve_dare, spectral_radius
from ssicert.core.models import CovarianceModel
from ssicert.core.repair import (
    check_positive_real, full_pipeline, in_positive_real_set,
    repair, stabilize,
)
from ssicert.core.simulation import SimulationConfig, simulate


@pytest.fixture
def not_positive_real():
    """Scalar model whose spectrum R0 + 2Re(C(e^{iω} − A)⁻¹D) dips below zero at ω = π"""
    return CovarianceModel(A=np.array([[0.9]]), D=np.array([[1.0]]),
                           C=np.array([[1.0]]), R0=np.array([[0.1]]))


class TestStabilize:
    """Test the projection onto Schur-stable matrices"""

    def test_stable_input_unchanged(self, certification):
        """Test a stable A is returned as is"""
        assert np.array_equal(stabilize(certification.A), certification.A)

    @pytest.mark.parametrize("A", [
        np.array([[1.05, 0.2], [0.0, 0.5]]),
        np.array([[0.9, 0.8], [-0.3, 1.1]]),
        np.array([[1.3]]),
    ])
    def test_unstable_input_projected(self, A):
        """Test ρ(Â) lands inside the unit disc with the requested margin"""
        A_hat = stabilize(A)
        rho = spectral_radius(A_hat)
        assert rho < 1.0 - 1e-10, f"projection left rho={rho}"
        assert np.linalg.norm(A_hat - A) < np.linalg.norm(A), "projection moved too far"


class TestPositiveReal:
    """Test the positive-real decision"""

    def test_exact_model_is_positive_real(self, certification):
        """Test exact covariances pass with the Riccati solution"""
        cm = certification.covariance_model()
        check = check_positive_real(cm)
        assert check.valid and check.method == "dare"
        assert in_positive_real_set(cm, check.P)

    def test_detects_violation(self, not_positive_real):
        """Test a model with a negative spectrum is rejected"""
        check = check_positive_real(not_positive_real)
        assert not check, "model should not be positive real"
        assert check.method == "sdp"
        assert check.margin < 0

    def test_membership_rejects_indefinite_P(self, certification):
        """Test a non-positive P is never in the set"""
        cm = certification.covariance_model()
        assert not in_positive_real_set(cm, -np.eye(2))

    def test_requires_stable_A(self):
        """Test an unstable covariance model raises UnstableMatrix"""
        cm = CovarianceModel(A=np.array([[1.1]]), D=np.array([[0.1]]),
                             C=np.array([[1.0]]), R0=np.array([[1.0]]))
        with pytest.raises(UnstableMatrix):
            check_positive_real(cm)


class TestRepair:
    """Test the closest-valid repair program"""

    @pytest.mark.parametrize("norm_choice", ["two_norm", "f_norm"])
    def test_repair_restores_validity(self, not_positive_real, norm_choice):
        """Test the repaired model has a Riccati solution with Q ≻ 0 and keeps A, C"""
        outcome = repair(not_positive_real, norm_choice)
        fixed = outcome.model
        assert np.array_equal(fixed.A, not_positive_real.A)
        assert np.array_equal(fixed.C, not_positive_real.C)
        P, Q, _ = solve_dare(fixed.A, fixed.D, fixed.C, fixed.R0)
        assert np.all(np.linalg.eigvalsh(Q) > 0)
        assert check_positive_real(fixed).valid
        assert np.all(np.linalg.eigvalsh(outcome.Phi) > -1e-7)
        assert outcome.lam > 0
        assert outcome.innovations.is_stable

    def test_adjustments_are_consistent(self, not_positive_real):
        """Test the reported adjustments equal the change of D and R0"""
        outcome = repair(not_positive_real)
        dD, dR0 = outcome.adjustment_norms
        assert dD == pytest.approx(abs(outcome.D_hat[0, 0] - 1.0))
        assert dR0 == pytest.approx(abs(outcome.R0_hat[0, 0] - 0.1))
        assert np.allclose(outcome.P_bar, 0.81 * outcome.P_bar + outcome.Phi11, atol=1e-10)

    def test_rejects_unknown_norm(self, not_positive_real):
        with pytest.raises(ValueError):
            repair(not_positive_real, "nuclear")


class TestFullPipeline:
    """Test the end-to-end identification chain"""

    def test_simulated_certification_data(self, certification):
        """Test the flags agree with the recorded diagnostics"""
        ts = simulate(SimulationConfig(certification, 20000, seed=11))
        result = full_pipeline(ts, 4, 2)
        assert result.model.is_stable
        assert np.all(np.linalg.eigvalsh(result.model.Q) > 0)
        assert result.N == 20000 and result.m == 4
        if not result.stabilized:
            assert result.diagnostics["stabilization_shift"] == 0.0
        if not result.repaired:
            assert result.diagnostics["repair_lambda"] == 0.0
        for key in ("rho_raw", "rho", "adjust_D", "adjust_R0", "singular_values"):
            assert key in result.diagnostics, f"missing diagnostic {key}"

    @pytest.mark.parametrize("seed", range(5))
    def test_short_noisy_records_stay_valid(self, slow_pole, seed):
        """Test moderate slow-pole records still yield stable models with Q ≻ 0"""
        ts = simulate(SimulationConfig(slow_pole, 2000, seed=seed))
        result = full_pipeline(ts, 4, 2)
        assert result.model.is_stable, f"seed {seed}: unstable model"
        assert np.all(np.linalg.eigvalsh(result.model.Q) > 0)
        assert result.diagnostics["rho"] < 1.0


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
