"""
Unit Tests for Simulation, Certification and Monte Carlo Studies
"""

import pytest
import numpy as np
import sys
from pathlib import Path

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from ssicert.core.asymptotics import asymptotic_covariance
from ssicert.core.errors import InsufficientData, UnstableMatrix
from ssicert.core.models import InnovationsModel
from ssicert.core.simulation import (
    MAX_BURN_IN, RNG_ALGORITHM, SimulationConfig, certify, default_burn_in,
    make_generator, run_monte_carlo, run_seed, run_variance_experiment, simulate,
)
from ssicert.core.systems import SYSTEMS


class TestRandomness:
    """Test seeding and burn-in rules"""

    def test_same_seed_same_data(self, certification):
        a = simulate(SimulationConfig(certification, 500, seed=3))
        b = simulate(SimulationConfig(certification, 500, seed=3))
        c = simulate(SimulationConfig(certification, 500, seed=4))
        assert np.array_equal(a.samples, b.samples), "same seed must reproduce the data"
        assert not np.array_equal(a.samples, c.samples)

    def test_run_seeds(self):
        """Test run seeds are deterministic and distinct"""
        seeds = [run_seed(0, i) for i in range(100)]
        assert seeds == [run_seed(0, i) for i in range(100)]
        assert len(set(seeds)) == 100
        assert run_seed(1, 0) != run_seed(0, 0)

    def test_generator_is_philox(self):
        assert isinstance(make_generator(5).bit_generator, np.random.Philox)
        assert "Philox" in RNG_ALGORITHM

    def test_burn_in(self, slow_pole, scalar):
        """Test ceil(10 / (1 − ρ)) with the 10⁴ cap"""
        assert default_burn_in(slow_pole) == MAX_BURN_IN
        assert 50 <= default_burn_in(scalar) <= 51
        cfg = SimulationConfig(scalar, 10, burn_in=0)
        assert cfg.resolved_burn_in == 0

    def test_invalid_config(self, scalar):
        with pytest.raises(ValueError):
            SimulationConfig(scalar, 0)
        with pytest.raises(ValueError):
            SimulationConfig(scalar, 10, seed=-1)


class TestSimulate:
    """Test the simulated output statistics"""

    def test_shape(self, certification):
        ts = simulate(SimulationConfig(certification, 1234, seed=1))
        assert ts.N == 1234 and ts.n_y == 2

    def test_zero_noise_is_silent(self, certification):
        """Test Q = 0 produces an identically zero output"""
        silent = InnovationsModel(A=certification.A, K=certification.K,
                                  Q=np.zeros((2, 2)), C=certification.C)
        ts = simulate(SimulationConfig(silent, 200, seed=0))
        assert np.all(ts.samples == 0.0)

    def test_unstable_model_rejected(self):
        unstable = InnovationsModel(A=[[1.01]], K=[[0.1]], Q=[[1.0]], C=[[1.0]])
        with pytest.raises(UnstableMatrix):
            simulate(SimulationConfig(unstable, 10))

    def test_sample_R0_matches_lyapunov(self, certification):
        """Test each entry of R̃0 lies within 4 asymptotic standard deviations of R0"""
        N = 100_000
        ts = simulate(SimulationConfig(certification, N, seed=2024))
        R0_hat = ts.samples.T @ ts.samples / N
        R0 = certification.covariance_model().R0
        std = np.sqrt(np.diag(asymptotic_covariance(certification, 1).P_R0) / N)
        error = (R0_hat - R0).reshape(-1, order="F")
        assert np.all(np.abs(error) <= 4 * std), f"errors {error} vs std {std}"

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_white_noise_covariance(self, certification, seed):
        """Test K = 0, C = 0 gives white noise with covariance Q at rate 1/√N"""
        N = 20_000
        white = InnovationsModel(A=certification.A, K=np.zeros((2, 2)),
                                 Q=certification.Q, C=np.zeros((2, 2)))
        ts = simulate(SimulationConfig(white, N, seed=seed))
        R0_hat = ts.samples.T @ ts.samples / N
        Q = certification.Q
        assert np.linalg.norm(R0_hat - Q) <= 5 * np.linalg.norm(Q) / np.sqrt(N)


class TestCertify:
    """Test the end-to-end certificate"""

    def test_identified_mode(self, certification):
        """Test all bounds are finite and positive in identified mode"""
        ts = simulate(SimulationConfig(certification, 20_000, seed=8))
        cert = certify(ts, 4, 2, 0.95)
        report = cert.report
        assert cert.mode == "identified"
        for value in (report.h2_bound, report.hinf_bound_perturbative, report.hinf_bound_lmi):
            assert np.isfinite(value) and value > 0
        assert report.exact is None

    def test_true_mode_records_exact_errors(self, certification):
        """Test true mode needs the model and scores the identified one"""
        ts = simulate(SimulationConfig(certification, 20_000, seed=8))
        with pytest.raises(ValueError):
            certify(ts, 4, 2, mode="true")
        cert = certify(ts, 4, 2, 0.95, mode="true", true_model=certification)
        assert set(cert.report.exact) == {"h2", "hinf"}
        assert set(cert.report.coverage) == {"h2", "hinf_perturbative", "hinf_lmi"}

    def test_unknown_mode(self, certification):
        ts = simulate(SimulationConfig(certification, 2000, seed=8))
        with pytest.raises(ValueError):
            certify(ts, 4, 2, mode="oracle")

    @pytest.mark.slow
    def test_reference_certificate_covers_exact_error(self, certification):
        """Test at N = 1e5 every bound dominates the exact error of the identified model"""
        ts = simulate(SimulationConfig(certification, 100_000, seed=0))
        cert = certify(ts, 4, 2, 0.9518, mode="true", true_model=certification)
        assert all(cert.report.coverage.values()), f"coverage {cert.report.coverage}"


class TestMonteCarlo:
    """Test Monte Carlo batches"""

    def test_single_run(self, certification):
        report = run_monte_carlo(certification, 2000, 4, runs=1, with_bounds=False, workers=1)
        assert report.runs == 1
        summary = report.summary
        assert summary['runs'] == 1
        if summary['valid'] == 1:
            assert summary['E2_std'] == 0.0

    def test_records_and_summary(self, certification):
        """Test records carry errors, bounds and coverage flags"""
        report = run_monte_carlo(certification, 5000, 4, runs=3, with_bounds=True, workers=1)
        doc = report.as_dict()
        assert doc['rng'] == RNG_ALGORITHM
        assert len(doc['records']) == 3
        good = [r for r in report.records if r.ok]
        assert good, "every run failed"
        for record in good:
            assert record.E2 >= 0 and record.Einf >= 0
            assert set(record.bounds) == {'h2', 'hinf_perturbative', 'hinf_lmi'}
            assert set(record.covered) == set(record.bounds)
        assert set(report.summary['coverage']) == {'h2', 'hinf_perturbative', 'hinf_lmi'}

    def test_parallel_matches_sequential(self, certification):
        """Test worker count does not change the results"""
        kwargs = dict(N=2000, m=4, runs=3, base_seed=5, with_bounds=False)
        seq = run_monte_carlo(certification, workers=1, **kwargs)
        par = run_monte_carlo(certification, workers=2, **kwargs)
        assert [r.seed for r in seq.records] == [r.seed for r in par.records]
        assert [r.E2 for r in seq.records] == pytest.approx([r.E2 for r in par.records],
                                                            nan_ok=True)

    def test_zero_runs_rejected(self, certification):
        with pytest.raises(ValueError):
            run_monte_carlo(certification, 2000, 4, runs=0)

    def test_variance_needs_valid_runs(self, scalar):
        """Test a variance study whose every run fails raises InsufficientData"""
        with pytest.raises(InsufficientData):
            run_variance_experiment(scalar, 6, 4, runs=2)

    @pytest.mark.slow
    def test_validity_and_error_statistics(self):
        """Test 200 slow-pole identifications at N = 2500 are all valid with the expected errors"""
        report = run_monte_carlo(SYSTEMS['slow_pole'](), 2500, 4, runs=200,
                                 with_bounds=False)
        summary = report.summary
        assert summary['valid'] == 200, f"{summary['failures']} runs failed"
        assert 0.35 <= summary['E2_mean'] <= 0.65, f"E2 mean {summary['E2_mean']:.4f}"
        assert 0.45 <= summary['Einf_mean'] <= 0.80, f"Einf mean {summary['Einf_mean']:.4f}"


@pytest.mark.slow
class TestVarianceExperiment:
    """Test the first-order transfer-function variance against Monte Carlo"""

    def test_scalar_system_agreement(self, scalar):
        """Test agreement within 1.5× at ≥ 90% of the frequencies"""
        experiment = run_variance_experiment(scalar, 10_000, 4, runs=200)
        assert experiment.failures <= 10
        fraction = experiment.agreement(1.5)
        assert fraction >= 0.9, f"agreement at only {fraction:.0%} of frequencies"


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
