"""
Tests for Born-rule sampling and Monte Carlo estimation
"""
import numpy as np
import pytest

from app.exceptions import DimensionError, ParameterError, PositivityError, SamplingError
from app.models.distribution import ContinuousOutcomeDistribution, DiscreteOutcomeDistribution
from app.models.operator import Operator
from app.services.estimation_service import EstimationService, chunk_sizes
from app.services.locc_service import LoccService
from app.services.operator_algebra import random_density, random_operator
from app.services.su2_service import Su2Service
from app.services.sud_service import SudService


@pytest.fixture
def estimation_service():
    """Single-worker service with small chunks"""
    return EstimationService(chunk_size=1000, workers=1)


@pytest.fixture
def weyl_detector(weyl_service):
    return weyl_service.build_detector(3)


class TestChunking:
    """Test cases for the chunked sample stream"""

    def test_chunk_sizes(self):
        """Test n is cut into full chunks plus a remainder"""
        assert chunk_sizes(10, 4) == [4, 4, 2]
        assert chunk_sizes(8, 4) == [4, 4]
        assert chunk_sizes(3, 4) == [3]

    @pytest.mark.parametrize("field", ["chunk_size", "workers", "proposal_batch", "max_rejection_rounds"])
    def test_zero_setting_rejected(self, field):
        """Test an explicit 0 is kept and rejected rather than replaced by the default"""
        with pytest.raises(ParameterError):
            EstimationService(**{field: 0})

    def test_worker_count_does_not_change_results(self, weyl_detector, qutrit_state):
        """Test identical estimates for one and several workers"""
        observable = random_operator(3, seed=2, hermitian=True)
        serial = EstimationService(chunk_size=500, workers=1).estimate(weyl_detector, qutrit_state, observable, 4321, seed=7)
        parallel = EstimationService(chunk_size=500, workers=3).estimate(weyl_detector, qutrit_state, observable, 4321, seed=7)

        assert serial.estimate_re == parallel.estimate_re
        assert serial.stderr == parallel.stderr

    def test_same_seed_same_samples(self, estimation_service, weyl_detector, qutrit_state):
        """Test sampling is a function of (seed, n)"""
        dist = estimation_service.outcome_distribution(weyl_detector, qutrit_state)
        first = estimation_service.sample_outcomes(dist, 2500, seed=3)
        second = estimation_service.sample_outcomes(dist, 2500, seed=3)
        other = estimation_service.sample_outcomes(dist, 2500, seed=4)

        np.testing.assert_array_equal(first.outcomes, second.outcomes)
        assert not np.array_equal(first.outcomes, other.outcomes)


class TestDistributions:
    """Test cases for outcome distributions"""

    def test_discrete_distribution(self, estimation_service, weyl_detector, qutrit_state):
        """Test Weyl outcomes form a normalised probability vector"""
        dist = estimation_service.outcome_distribution(weyl_detector, qutrit_state)

        assert isinstance(dist, DiscreteOutcomeDistribution)
        assert dist.size == 9
        assert dist.probabilities.sum() == pytest.approx(1.0)
        assert dist.raw_total == pytest.approx(1.0)

    def test_empirical_frequencies(self, estimation_service, weyl_detector, qutrit_state):
        """Test sampled frequencies approach p_i"""
        dist = estimation_service.outcome_distribution(weyl_detector, qutrit_state)
        batch = estimation_service.sample_outcomes(dist, 50000, seed=1)
        frequencies = np.bincount(batch.outcomes, minlength=9) / 50000

        np.testing.assert_allclose(frequencies, dist.probabilities, atol=0.01)

    def test_haar_density_bounded(self, estimation_service, qubit_state):
        """Test the SU(d) density d·Tr[U†ρUνᵀ] stays within [0, d]"""
        detector = SudService().build_detector(2)
        dist = estimation_service.outcome_distribution(detector, qubit_state)
        unitaries = dist.propose(np.random.default_rng(0), 1000)
        density = dist.density(unitaries)

        assert dist.proposal == ContinuousOutcomeDistribution.HAAR
        assert np.all(density >= -1e-12)
        assert np.all(density <= dist.bound + 1e-12)
        assert density.mean() == pytest.approx(1.0, abs=0.1)

    def test_empty_distribution_rejected(self):
        """Test an empty probability vector is a parameter error"""
        with pytest.raises(ParameterError):
            DiscreteOutcomeDistribution(probabilities=np.array([]))

    def test_negative_probability_rejected(self):
        """Test a negative probability is a positivity error"""
        with pytest.raises(PositivityError):
            DiscreteOutcomeDistribution(probabilities=np.array([0.5, -0.1, 0.6]))

    def test_zero_total_rejected(self):
        """Test all-zero probabilities are a positivity error"""
        with pytest.raises(PositivityError):
            DiscreteOutcomeDistribution(probabilities=np.zeros(4))

    def test_state_dimension_checked(self, estimation_service, weyl_detector, qubit_state):
        """Test ρ must act on H"""
        with pytest.raises(DimensionError):
            estimation_service.outcome_distribution(weyl_detector, qubit_state)


class TestEstimate:
    """Test cases for estimate and convergence_scan"""

    def test_weyl_estimate_near_exact(self, estimation_service, weyl_detector, qutrit_state):
        """Test the estimate lies within five standard errors"""
        observable = random_operator(3, seed=6, hermitian=True)
        report = estimation_service.estimate(weyl_detector, qutrit_state, observable, 20000, seed=11)

        assert report.exact is not None
        assert report.z_score() < 5
        assert report.imag_residual is not None
        assert report.acceptance_rate is None

    def test_identity_observable_has_no_variance(self, estimation_service, weyl_detector, qutrit_state):
        """Test f ≡ 1 for O = I gives estimate 1 with vanishing stderr"""
        report = estimation_service.estimate(weyl_detector, qutrit_state, Operator.identity(3), 1000, seed=0)

        assert report.estimate_re == 1.0
        assert report.estimate_im == 0.0
        assert report.stderr == 0.0
        assert report.z_score() is None

    def test_non_hermitian_observable(self, estimation_service, weyl_detector, qutrit_state):
        """Test complex estimates and no imaginary residual for non-Hermitian O"""
        observable = random_operator(3, seed=9)
        report = estimation_service.estimate(weyl_detector, qutrit_state, observable, 20000, seed=2)

        assert report.imag_residual is None
        assert abs(report.estimate - report.exact) < 5 * report.stderr * np.sqrt(2) + 1e-12

    def test_sud_estimate(self, estimation_service, qubit_state):
        """Test rejection sampling on the Haar detector"""
        detector = SudService().build_detector(2)
        observable = Operator(np.array([[0, 1], [1, 0]], dtype=complex))
        report = estimation_service.estimate(detector, qubit_state, observable, 20000, seed=5)

        assert 0.3 < report.acceptance_rate <= 1.0
        assert report.z_score() < 5

    def test_su2_estimate(self, estimation_service):
        """Test sampling over SU(2) quadrature nodes"""
        detector = Su2Service(grid_shape=(8, 6, 6)).build_detector(1)
        state = random_density(3, 3, seed=3)
        observable = random_operator(3, seed=4, hermitian=True)
        report = estimation_service.estimate(detector, state, observable, 20000, seed=8)

        assert report.exact is not None
        assert report.z_score() < 5

    def test_locc_estimate(self, estimation_service, qubit_state):
        """Test the LOCC detector estimates Tr[ρO]"""
        detector = LoccService().build_detector(2)
        observable = random_operator(2, seed=12, hermitian=True)
        report = estimation_service.estimate(detector, qubit_state, observable, 20000, seed=9)

        assert report.z_score() < 5

    def test_too_few_samples(self, estimation_service, weyl_detector, qutrit_state):
        """Test n ≥ 2 is required for a standard error"""
        with pytest.raises(ParameterError):
            estimation_service.estimate(weyl_detector, qutrit_state, Operator.identity(3), 1, seed=0)

    def test_rejection_budget_exhausted(self, qubit_state):
        """Test SamplingError when rounds run out"""
        service = EstimationService(chunk_size=100, workers=1, proposal_batch=1, max_rejection_rounds=1)
        detector = SudService().build_detector(2)
        with pytest.raises(SamplingError):
            service.estimate(detector, qubit_state, Operator.identity(2), 10, seed=0)

    def test_stderr_scaling(self, weyl_service):
        """Test stderr falls as n^(-1/2) over n = 10², 10⁴, 10⁶"""
        detector = weyl_service.build_detector(2)
        state = random_density(2, 2, seed=31)
        observable = random_operator(2, seed=32, hermitian=True)
        reports = EstimationService(workers=1).convergence_scan(
            detector, state, observable, [100, 10_000, 1_000_000], seed=1
        )
        stderrs = np.array([r.stderr for r in reports])
        slope = np.polyfit(np.log([r.n for r in reports]), np.log(stderrs), 1)[0]

        assert len(reports) == 3
        assert np.all((stderrs[:-1] / stderrs[1:] > 5) & (stderrs[:-1] / stderrs[1:] < 20))
        assert -0.55 < slope < -0.45

    def test_independent_estimates_are_unbiased(self, weyl_service):
        """Test 200 estimates at n = 10⁴ have an aggregate z-score below 4"""
        detector = weyl_service.build_detector(2)
        state = random_density(2, 2, seed=33)
        observable = random_operator(2, seed=34, hermitian=True)
        service = EstimationService(workers=1)

        reports = [service.estimate(detector, state, observable, 10_000, seed=seed) for seed in range(200)]
        deviations = np.array([r.estimate_re - r.exact_re for r in reports])
        stderrs = np.array([r.stderr for r in reports])
        aggregate = deviations.sum() / np.sqrt(np.sum(stderrs**2))

        assert np.all(stderrs > 0)
        assert abs(aggregate) < 4
        assert np.mean(np.abs(deviations / stderrs) < 2) > 0.9

    def test_schedule_must_increase(self, estimation_service, weyl_detector, qutrit_state):
        """Test a non-increasing schedule is rejected"""
        with pytest.raises(ParameterError):
            estimation_service.convergence_scan(weyl_detector, qutrit_state, Operator.identity(3), [100, 100], seed=0)
