"""
Unit Tests for the Model-Error Bounds

Registry, degenerate inputs, monotonicity and soundness of the H2 bound, the
perturbative H∞ bound and the robust-LMI H∞ bound.
"""

import pytest
import numpy as np
import cvxpy as cp
import sys
from pathlib import Path

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from ssicert.core.asymptotics import FNormBounds, asymptotic_covariance, fnorm_bounds, true_model_maps
from ssicert.core.bounds import BOUNDS, compute_all_bounds
from ssicert.core.bounds.h2 import h2_error_bound
from ssicert.core.bounds.hinf_lmi import hinf_error_bound_lmi, uncertainty_channels
from ssicert.core.bounds.hinf_perturbative import hinf_error_bound_perturbative
from ssicert.core.errors import SdpInfeasible
from ssicert.core.linalg import peak_gain
from ssicert.core.models import TransferFunction
from ssicert.core.sdp import INFEASIBLE, SdpProblem, psd, solve_sdp
from ssicert.core.simulation import certify_model

CONFIDENCE = 0.9518


@pytest.fixture
def setup(certification):
    """Maps, covariance and F-norm bounds of the certification system at N = 1e5"""
    maps = true_model_maps(certification, 4)
    cov = asymptotic_covariance(maps.model, 4)
    return maps, fnorm_bounds(cov, maps, 100_000, CONFIDENCE)


def _zero_bounds(fb: FNormBounds) -> FNormBounds:
    return fb.scaled(0.0)


class TestRegistry:
    """Test the bound registry"""

    def test_all_bounds_registered(self):
        """Test that all expected bounds are registered"""
        for key in ['h2', 'hinf_perturbative', 'hinf_lmi']:
            assert key in BOUNDS, f"Bound '{key}' not found in registry"

    def test_names_match_keys(self):
        """Test each estimator reports its own registry key"""
        for key, cls in BOUNDS.items():
            assert cls().name == key, f"{cls.__name__}.name != {key}"

    def test_report_contents(self, setup):
        """Test the report carries every bound, eps and the gramian"""
        maps, fb = setup
        report = compute_all_bounds(maps.model, fb, maps)
        doc = report.as_dict()
        for key in ['confidence', 'chi2_quantile', 'dof', 'N', 'h2_bound',
                    'hinf_bound_perturbative', 'hinf_bound_lmi', 'eps', 'P_bar']:
            assert key in doc, f"report is missing {key}"
        assert set(doc['eps']) == {'A', 'B', 'C', 'F', 'P1', 'P2'}
        assert doc['dof'] == 68
        assert report.coverage == {}
        assert set(report.stats) == set(BOUNDS)

    def test_subset_of_bounds(self, setup):
        """Test skipped bounds are reported as NaN"""
        maps, fb = setup
        report = compute_all_bounds(maps.model, fb, maps, names=['h2'])
        assert np.isfinite(report.h2_bound)
        assert np.isnan(report.hinf_bound_lmi)


class TestDegenerateInputs:
    """Test zero uncertainty gives zero bounds"""

    def test_zero_eps(self, setup):
        maps, fb = setup
        zero = _zero_bounds(fb)
        assert h2_error_bound(maps.model, zero, maps) == 0.0
        assert hinf_error_bound_perturbative(maps.model, zero, maps) == 0.0
        assert hinf_error_bound_lmi(maps.model, zero, maps) == 0.0

    def test_channels_skip_zero_eps(self, setup):
        """Test only channels with positive eps enter the LMI"""
        _, fb = setup
        partial = FNormBounds(fb.eps_A, 0.0, fb.eps_C, 0.0, fb.confidence,
                              fb.chi2_quantile, fb.dof, fb.N)
        names = [name for name, _, _ in uncertainty_channels(2, 2, partial)]
        assert names == ['A', 'C']

    def test_channel_layout(self, setup):
        """Test H_k F E_k places a perturbation of norm eps in the right block"""
        _, fb = setup
        n, ny = 2, 2
        for name, H, E in uncertainty_channels(n, ny, fb):
            eps = fb.as_dict()[name]
            block = H @ E
            assert np.linalg.norm(block, 2) == pytest.approx(eps)
        A_block = uncertainty_channels(n, ny, fb)[0]
        H, E = A_block[1], A_block[2]
        assert np.count_nonzero((H @ E)[:n, :n]) == n
        assert np.count_nonzero((H @ E)[n:, :]) == 0


class TestScaling:
    """Test monotonicity and scaling of the bounds in eps"""

    def test_monotone(self, setup):
        """Test every bound grows when all eps grow"""
        maps, fb = setup
        small = compute_all_bounds(maps.model, fb.scaled(0.5), maps)
        large = compute_all_bounds(maps.model, fb, maps)
        assert large.h2_bound > small.h2_bound
        assert large.hinf_bound_perturbative > small.hinf_bound_perturbative
        assert large.hinf_bound_lmi >= small.hinf_bound_lmi * (1 - 1e-6)

    def test_perturbative_is_linear(self, setup):
        """Test the perturbative bound is exactly linear in a common eps scale"""
        maps, fb = setup
        base = hinf_error_bound_perturbative(maps.model, fb, maps)
        tenth = hinf_error_bound_perturbative(maps.model, fb.scaled(0.1), maps)
        assert tenth == pytest.approx(base / 10, rel=1e-3)

    def test_lmi_shrinks_with_eps(self, setup):
        """Test dividing every eps by 10 divides the LMI bound by at least 5"""
        maps, fb = setup
        base = hinf_error_bound_lmi(maps.model, fb, maps)
        tenth = hinf_error_bound_lmi(maps.model, fb.scaled(0.1), maps)
        assert tenth <= base / 5, f"LMI bound {tenth:.4g} vs {base:.4g}"


class TestSoundness:
    """Test the robust-LMI bound holds for parameters inside the box"""

    def test_lmi_covers_box_samples(self, setup):
        """Test sampled perturbations on the box boundary never exceed the LMI bound"""
        maps, fb = setup
        model = maps.model
        bound = hinf_error_bound_lmi(model, fb, maps)
        A, B, C, F = model.A, model.B, model.C, model.F
        rng = np.random.default_rng(9)

        def on_sphere(shape, eps):
            d = rng.standard_normal(shape)
            return eps * d / np.linalg.norm(d)

        for _ in range(25):
            dA = on_sphere(A.shape, fb.eps_A)
            dB = on_sphere(B.shape, fb.eps_B)
            dC = on_sphere(C.shape, fb.eps_C)
            dF = on_sphere(F.shape, fb.eps_F)
            n = A.shape[0]
            G = TransferFunction(
                np.block([[A + dA, np.zeros((n, n))], [np.zeros((n, n)), A]]),
                np.vstack([B + dB, B]),
                np.hstack([C + dC, -C]),
                dF,
            )
            gain, _ = peak_gain(G, n_points=1024)
            assert gain <= bound * (1 + 1e-4), f"sample gain {gain:.4g} > bound {bound:.4g}"

    def test_lmi_dominates_static_part(self, setup):
        """Test the bound is at least eps_F (perturbing F alone)"""
        maps, fb = setup
        assert hinf_error_bound_lmi(maps.model, fb, maps) >= fb.eps_F * (1 - 1e-4)


class TestSdpBackend:
    """Test status normalization of the SDP wrapper"""

    def test_infeasible_program(self):
        """Test contradictory constraints are reported as infeasible"""
        X = cp.Variable((2, 2), symmetric=True)
        prob = SdpProblem(cp.Minimize(cp.trace(X)), [psd(X - np.eye(2)), psd(-X)],
                          {'X': X}, name="contradiction")
        result = solve_sdp(prob)
        assert result.status == INFEASIBLE
        with pytest.raises(SdpInfeasible):
            result.require("contradiction")

    def test_feasible_program(self):
        """Test a simple SDP returns its optimum"""
        X = cp.Variable((2, 2), symmetric=True)
        target = np.array([[2.0, 0.5], [0.5, 1.0]])
        prob = SdpProblem(cp.Minimize(cp.trace(X)), [psd(X - target)], {'X': X})
        result = solve_sdp(prob).require()
        assert result.objective == pytest.approx(3.0, rel=1e-5)
        assert np.allclose(result.values['X'], target, atol=1e-4)


@pytest.mark.slow
class TestReferenceCertificate:
    """Test the certification system bounds at N = 1e5, confidence 0.9518"""

    @pytest.fixture
    def report(self, certification):
        return certify_model(certification, 100_000, 4, CONFIDENCE)

    def test_h2_band(self, report):
        assert 0.05 <= report.h2_bound <= 0.25, f"H2 bound {report.h2_bound:.4f}"

    def test_hinf_perturbative_band(self, report):
        value = report.hinf_bound_perturbative
        assert 0.04 <= value <= 0.20, f"perturbative H∞ bound {value:.4f}"

    def test_hinf_lmi_band(self, report):
        assert 0.07 <= report.hinf_bound_lmi <= 0.35, f"LMI H∞ bound {report.hinf_bound_lmi:.4f}"


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
