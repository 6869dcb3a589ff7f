"""
Unit Tests for Metrics Module

Tests the error system, exact error norms, relative errors and report text.
"""

import pytest
import numpy as np
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from ssicert.core.errors import DimensionMismatch
from ssicert.core.linalg import h2_norm
from ssicert.core.metrics import (
    ErrorSystem,
    exact_error_norms,
    format_bound_report,
    model_norms,
    relative_errors,
)
from ssicert.core.models import InnovationsModel


def _shifted(model, dA=0.0, dC=0.0):
    return InnovationsModel(A=model.A + dA, K=model.K, Q=model.Q, C=model.C + dC)


class TestErrorSystem:
    """Test the realization of G_e − G̃_e"""

    def test_response_is_difference(self, certification):
        """Test the error response equals the difference of the two responses"""
        other = _shifted(certification, dA=0.01 * np.eye(2))
        err = ErrorSystem(certification, other)
        omegas = np.array([0.0, 1.0, 3.0])
        diff = (certification.transfer_function().evaluate(omegas)
                - other.transfer_function().evaluate(omegas))
        assert np.allclose(err.transfer_function().evaluate(omegas), diff, atol=1e-12)
        assert err.A.shape == (4, 4) and err.F.shape == (2, 2)

    def test_frequency_response_grid(self, certification):
        other = _shifted(certification, dC=0.05)
        omegas, gains = ErrorSystem(certification, other).frequency_response(64)
        assert len(omegas) == 65 and omegas[-1] == pytest.approx(np.pi)
        assert np.all(gains >= 0)

    def test_output_dimensions_must_match(self, certification, scalar):
        with pytest.raises(DimensionMismatch):
            ErrorSystem(certification, scalar)


class TestErrorNorms:
    """Test exact and relative error norms"""

    def test_identical_models(self, certification):
        """Test a model compared with itself has zero error"""
        h2_err, hinf_err = exact_error_norms(certification, certification)
        assert h2_err < 1e-7, f"H2 error of identical models: {h2_err}"
        assert hinf_err < 1e-9, f"H∞ error of identical models: {hinf_err}"

    def test_hinf_dominates_h2_for_scalar(self, scalar):
        """Test ‖G‖_∞ ≥ ‖G‖_H2 for a single-output, single-input system"""
        other = _shifted(scalar, dA=0.05)
        h2_err, hinf_err = exact_error_norms(scalar, other)
        assert hinf_err >= h2_err * (1 - 1e-6)

    def test_relative_errors(self, certification):
        """Test E2, E∞ are the absolute errors over the true norms"""
        other = _shifted(certification, dA=0.02 * np.eye(2))
        norms = model_norms(certification)
        errors = relative_errors(certification, other, norms)
        assert errors['E2'] == pytest.approx(errors['h2_error'] / norms[0])
        assert errors['Einf'] == pytest.approx(errors['hinf_error'] / norms[1])
        assert norms[0] == pytest.approx(h2_norm(certification.transfer_function()))

    def test_error_grows_with_perturbation(self, certification):
        small = exact_error_norms(certification, _shifted(certification, dA=0.005 * np.eye(2)))
        large = exact_error_norms(certification, _shifted(certification, dA=0.02 * np.eye(2)))
        assert large[0] > small[0] and large[1] > small[1]


class TestReportFormatting:
    """Test plain-text bound reports"""

    @pytest.fixture
    def report(self):
        return {
            'confidence': 0.9518, 'chi2_quantile': 88.5, 'dof': 68, 'N': 100000,
            'h2_bound': 0.1059, 'hinf_bound_perturbative': 0.0848, 'hinf_bound_lmi': 0.1467,
            'eps': {'A': 0.01, 'B': 0.02, 'C': 0.03, 'F': 0.004, 'P1': 0.5, 'P2': 0.06},
        }

    def test_contains_bounds(self, report):
        text = format_bound_report(report)
        assert "95.18%" in text
        assert "0.1059" in text and "0.0848" in text and "0.1467" in text
        assert "eps_P2" in text
        assert "Exact errors" not in text

    def test_coverage_marks(self, report):
        report['exact'] = {'h2': 0.0075, 'hinf': 0.2}
        report['coverage'] = {'h2': True, 'hinf_perturbative': False, 'hinf_lmi': False}
        text = format_bound_report(report)
        assert "✓ covered" in text
        assert text.count("✗ violated") == 2


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
