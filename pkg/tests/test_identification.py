"""
Unit Tests for Covariance-Based Identification

Sample covariances, Hankel assembly, balanced realization and the exact-data
round trip back to the innovations model.
"""

import pytest
import numpy as np
import sys
from pathlib import Path

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from ssicert.core.errors import (
    InsufficientData, InsufficientLags, RankDeficient,
)
from ssicert.core.identification import (
    build_hankel, covariance_to_innovations, extract_covariance_model,
    identify_covariance_model, realize, sample_covariances, suggest_order,
    svd_sign_fixed,
)
from ssicert.core.models import TimeSeries

from tests.conftest import random_innovations_model


def _exact_chain(model, m):
    covs = model.exact_covariances(2 * m - 1)
    hankel = build_hankel(covs, m)
    real = realize(hankel, model.n_x)
    return hankel, real, extract_covariance_model(real, hankel.R0)


class TestSampleStatistics:
    """Test covariance estimates and Hankel structure"""

    def test_sample_covariances_by_hand(self):
        """Test lag-0 and lag-1 estimates on a tiny scalar series"""
        ts = TimeSeries(np.array([1.0, 2.0, -1.0, 0.5]))
        covs = sample_covariances(ts, 1)
        assert covs[0][0, 0] == pytest.approx((1 + 4 + 1 + 0.25) / 4)
        assert covs[1][0, 0] == pytest.approx((2 * 1 + -1 * 2 + 0.5 * -1) / 3)

    def test_lag_orientation(self):
        """Test R̃_k pairs y_t with y_{t−k} as y_t y_{t−k}ᵀ"""
        Y = np.zeros((5, 2))
        Y[1, 0] = 1.0   # channel 1 at t = 1
        Y[2, 1] = 1.0   # channel 2 at t = 2
        covs = sample_covariances(TimeSeries(Y), 1)
        assert covs[1][1, 0] > 0, "R_1[1, 0] should see y2(t=2) y1(t=1)"
        assert covs[1][0, 1] == 0

    def test_max_lag_needs_samples(self):
        """Test max_lag ≥ N raises InsufficientData"""
        with pytest.raises(InsufficientData):
            sample_covariances(TimeSeries(np.ones(3)), 3)

    def test_hankel_blocks(self, certification):
        """Test block (i, j) of the Hankel matrix is R_{i+j+1}"""
        m, ny = 3, 2
        covs = certification.exact_covariances(2 * m - 1)
        hankel = build_hankel(covs, m)
        assert hankel.H.shape == (m * ny, m * ny)
        for i in range(m):
            for j in range(m):
                block = hankel.H[i * ny:(i + 1) * ny, j * ny:(j + 1) * ny]
                assert np.array_equal(block, covs[i + j + 1]), f"block ({i}, {j})"
        assert np.array_equal(hankel.R0, covs[0])

    def test_hankel_needs_lags(self, certification):
        """Test fewer than 2m lags raises InsufficientLags"""
        with pytest.raises(InsufficientLags):
            build_hankel(certification.exact_covariances(4), 3)

    def test_identify_needs_data(self):
        """Test N < 2·m·n_y raises InsufficientData"""
        ts = TimeSeries(np.random.default_rng(0).standard_normal((15, 2)))
        with pytest.raises(InsufficientData):
            identify_covariance_model(ts, 4, 2)


class TestRealization:
    """Test the balanced SVD factorization"""

    def test_sign_convention(self):
        """Test the largest-magnitude entry of each left vector is positive"""
        H = np.random.default_rng(3).standard_normal((6, 6))
        U, s, V = svd_sign_fixed(H)
        pivots = np.argmax(np.abs(U), axis=0)
        assert np.all(U[pivots, np.arange(6)] > 0)
        assert np.allclose(U @ np.diag(s) @ V.T, H)

    def test_sign_convention_is_deterministic(self):
        """Test the factors do not depend on the sign of H"""
        H = np.random.default_rng(4).standard_normal((4, 4))
        U1, _, V1 = svd_sign_fixed(H)
        U2, _, V2 = svd_sign_fixed(-H)
        assert np.allclose(U1, U2)
        assert np.allclose(V1, -V2)

    def test_balanced_factors(self, certification):
        """Test ΩᵀΩ = ΓΓᵀ = Λ_s and ΩΓ reproduces an exact rank-n Hankel"""
        hankel, real, _ = _exact_chain(certification, 4)
        assert np.allclose(real.Omega.T @ real.Omega, real.Lambda_s, atol=1e-12)
        assert np.allclose(real.Gamma @ real.Gamma.T, real.Lambda_s, atol=1e-12)
        assert np.allclose(real.Omega @ real.Gamma, hankel.H, atol=1e-12)

    def test_rank_deficient_order(self, certification):
        """Test asking for more states than the data support raises RankDeficient"""
        covs = certification.exact_covariances(7)
        with pytest.raises(RankDeficient):
            realize(build_hankel(covs, 4), 4)

    def test_single_block_row_has_no_shift(self, scalar):
        """Test m = 1 cannot produce A"""
        hankel = build_hankel(scalar.exact_covariances(1), 1)
        with pytest.raises(InsufficientLags):
            extract_covariance_model(realize(hankel, 1), hankel.R0)

    def test_suggest_order(self, certification):
        """Test the largest singular-value gap sits at the true order"""
        _, real, _ = _exact_chain(certification, 4)
        assert suggest_order(real.singular_values) == 2
        assert suggest_order([3.0, 2.9, 0.01, 0.009]) == 2
        assert suggest_order([1.0]) == 1


class TestExactRoundTrip:
    """Test exact covariances give back the generating model"""

    @pytest.mark.parametrize("name,tol", [("certification", 1e-6), ("scalar", 1e-6),
                                          ("slow_pole", 1e-5)])
    def test_reference_systems(self, name, tol, request):
        """Test G_e is reproduced on a 512-point grid"""
        model = request.getfixturevalue(name)
        _, _, cm = _exact_chain(model, 4)
        model_hat = covariance_to_innovations(cm)
        omegas = np.linspace(0, np.pi, 512)
        G = model.transfer_function().evaluate(omegas)
        G_hat = model_hat.transfer_function().evaluate(omegas)
        error = np.max(np.abs(G - G_hat)) / np.max(np.abs(G))
        assert error < tol, f"{name}: relative transfer function error {error:.3e}"
        assert np.allclose(model_hat.Q, model.Q, atol=1e-7)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_systems(self, seed):
        """Test the round trip on random minimum-phase models"""
        model = random_innovations_model(seed)
        _, _, cm = _exact_chain(model, 3)
        model_hat = covariance_to_innovations(cm)
        for lag, (R, R_hat) in enumerate(zip(model.exact_covariances(8),
                                             model_hat.exact_covariances(8))):
            assert np.allclose(R, R_hat, atol=1e-8), f"seed {seed}: lag {lag} differs"


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
