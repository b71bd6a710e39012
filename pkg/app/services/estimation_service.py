"""
Born-rule sampling and Monte Carlo estimation of Tr[ρO] through a detector
"""
import time
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from joblib import Parallel, delayed

from app.config import settings
from app.exceptions import DimensionError, ParameterError, SamplingError
from app.models.distribution import ContinuousOutcomeDistribution, DiscreteOutcomeDistribution, SampleBatch
from app.models.operator import Operator, State
from app.models.povm import ContinuousBellPovm, Povm, UniversalDetector
from app.schemas.report import EstimationReport
from app.services.operator_algebra import haar_unitaries
from app.services.povm_service import PovmService
from app.services.su2_service import grid_unitaries

logger = structlog.get_logger(__name__)

OutcomeDistribution = Union[DiscreteOutcomeDistribution, ContinuousOutcomeDistribution]


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Independent generator for one fixed-size chunk of the sample stream"""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def chunk_sizes(n: int, chunk_size: int) -> List[int]:
    full, rest = divmod(n, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


class EstimationService:
    """
    Monte Carlo estimation over a deterministic chunked sample stream.

    The stream of n outcomes is cut into chunks of ``chunk_size``; chunk c
    draws from its own generator derived from (seed, c), so results do not
    depend on how many workers process the chunks.
    """

    def __init__(
        self,
        chunk_size: Optional[int] = None,
        workers: Optional[int] = None,
        proposal_batch: Optional[int] = None,
        max_rejection_rounds: Optional[int] = None,
        povm_service: Optional[PovmService] = None,
    ):
        self.chunk_size = settings.sample_chunk_size if chunk_size is None else chunk_size
        self.workers = settings.workers if workers is None else workers
        self.proposal_batch = settings.proposal_batch if proposal_batch is None else proposal_batch
        self.max_rejection_rounds = (
            settings.max_rejection_rounds if max_rejection_rounds is None else max_rejection_rounds
        )
        self.povms = povm_service or PovmService()

        for name in ("chunk_size", "workers", "proposal_batch", "max_rejection_rounds"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be at least 1, got {getattr(self, name)}", field=name)

    # Distributions
    def outcome_distribution(self, detector: UniversalDetector, state: State) -> OutcomeDistribution:
        """
        Outcome law of ``detector`` on ρ⊗ν

        Discrete POVMs give exact probabilities. Continuous Bell POVMs give a
        density against their proposal measure, bounded by the system
        dimension: d·Tr[U†ρUνᵀ] against Haar for SU(d), and
        (2j+1)·Tr[U_x†ρU_xνᵀ] against the quadrature weights for SU(2).
        """
        if state.dim != detector.dim_h:
            raise DimensionError(
                f"State dimension {state.dim} differs from system dimension {detector.dim_h}",
                dims=state.dim,
                expected=detector.dim_h,
            )
        povm = detector.povm
        if isinstance(povm, Povm):
            raw = self.povms.outcome_probabilities(povm, state, detector.ancilla)
            return DiscreteOutcomeDistribution(probabilities=raw, raw_total=float(raw.sum()))

        d = povm.dim_h
        rho = state.matrix
        nu_t = detector.ancilla.matrix.T

        if povm.group == ContinuousBellPovm.HAAR:

            def haar_density(unitaries: np.ndarray) -> np.ndarray:
                conjugated = np.conj(np.swapaxes(unitaries, 1, 2)) @ rho @ unitaries
                return d * np.einsum("nij,ji->n", conjugated, nu_t).real

            def haar_proposal(rng: np.random.Generator, size: int) -> np.ndarray:
                return haar_unitaries(d, size, rng)

            return ContinuousOutcomeDistribution(
                proposal=ContinuousOutcomeDistribution.HAAR,
                bound=povm.density_bound,
                density=haar_density,
                propose=haar_proposal,
                outcome_shape=(d, d),
            )

        unitaries = grid_unitaries(povm.spin, povm.grid)
        conjugated = np.conj(np.swapaxes(unitaries, 1, 2)) @ rho @ unitaries
        node_density = d * np.einsum("nij,ji->n", conjugated, nu_t).real
        cdf = np.cumsum(povm.grid.weights)
        cdf /= cdf[-1]

        def node_proposal(rng: np.random.Generator, size: int) -> np.ndarray:
            return np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), cdf.size - 1)

        return ContinuousOutcomeDistribution(
            proposal=ContinuousOutcomeDistribution.QUADRATURE,
            bound=povm.density_bound,
            density=lambda nodes: node_density[nodes],
            propose=node_proposal,
        )

    # Sampling
    def _discrete_chunk(self, dist: DiscreteOutcomeDistribution, size: int, rng: np.random.Generator) -> SampleBatch:
        cdf = np.cumsum(dist.probabilities)
        cdf /= cdf[-1]
        outcomes = np.minimum(np.searchsorted(cdf, rng.random(size), side="right"), dist.size - 1)
        return SampleBatch(outcomes=outcomes, proposals=size)

    def _rejection_chunk(self, dist: ContinuousOutcomeDistribution, size: int, rng: np.random.Generator) -> SampleBatch:
        accepted = []
        count = proposals = 0
        for _ in range(self.max_rejection_rounds):
            if count >= size:
                break
            candidates = dist.propose(rng, self.proposal_batch)
            keep = rng.random(self.proposal_batch) * dist.bound < dist.density(candidates)
            accepted.append(candidates[keep])
            count += int(keep.sum())
            proposals += self.proposal_batch
        else:
            if count < size:
                raise SamplingError(
                    f"Rejection sampling accepted {count} of {size} outcomes in {self.max_rejection_rounds} rounds",
                    accepted=count,
                    requested=size,
                )
        outcomes = np.concatenate(accepted)[:size]
        return SampleBatch(outcomes=outcomes, proposals=proposals, acceptance_rate=count / proposals)

    def _sample_chunk(self, dist: OutcomeDistribution, size: int, seed: int, chunk: int) -> SampleBatch:
        rng = chunk_rng(seed, chunk)
        if isinstance(dist, DiscreteOutcomeDistribution):
            return self._discrete_chunk(dist, size, rng)
        return self._rejection_chunk(dist, size, rng)

    def _run_chunks(self, function, n: int) -> list:
        sizes = chunk_sizes(n, self.chunk_size)
        if self.workers == 1 or len(sizes) == 1:
            return [function(size, chunk) for chunk, size in enumerate(sizes)]
        return Parallel(n_jobs=self.workers, prefer="threads")(
            delayed(function)(size, chunk) for chunk, size in enumerate(sizes)
        )

    def sample_outcomes(self, dist: OutcomeDistribution, n: int, seed: int) -> SampleBatch:
        """n outcomes, deterministic per (seed, n) for any worker count"""
        if n < 1:
            raise ParameterError(f"Sample count must be positive, got {n}", n=n)
        batches = self._run_chunks(lambda size, chunk: self._sample_chunk(dist, size, seed, chunk), n)

        outcomes = np.concatenate([batch.outcomes for batch in batches])
        proposals = sum(batch.proposals for batch in batches)
        acceptance = None
        if isinstance(dist, ContinuousOutcomeDistribution):
            acceptance = n / proposals
            logger.info("Rejection sampling finished", samples=n, proposals=proposals, acceptance_rate=acceptance)
        return SampleBatch(outcomes=outcomes, proposals=proposals, acceptance_rate=acceptance)

    # Estimation
    def _weights(self, detector: UniversalDetector, observable: Operator, dist, n: int, seed: int) -> Tuple[np.ndarray, Optional[float]]:
        def chunk_weights(size: int, chunk: int):
            batch = self._sample_chunk(dist, size, seed, chunk)
            return detector.processing.outcome_weights(observable, batch.outcomes), batch.proposals

        results = self._run_chunks(chunk_weights, n)
        weights = np.concatenate([np.asarray(w, dtype=np.complex128) for w, _ in results])
        proposals = sum(p for _, p in results)
        acceptance = n / proposals if isinstance(dist, ContinuousOutcomeDistribution) else None
        return weights, acceptance

    def estimate(
        self,
        detector: UniversalDetector,
        state: State,
        observable: Operator,
        n: int,
        seed: int,
        observable_label: str = "custom",
    ) -> EstimationReport:
        """Empirical mean of f over n sampled outcomes with its standard error"""
        if n < 2:
            raise ParameterError(f"Estimation needs n ≥ 2, got {n}", n=n)
        if observable.dims != (detector.dim_h, detector.dim_h):
            raise DimensionError(
                f"Observable dims {observable.dims} differ from system dims {(detector.dim_h, detector.dim_h)}",
                dims=observable.dims,
            )

        started = time.perf_counter()
        dist = self.outcome_distribution(detector, state)
        weights, acceptance = self._weights(detector, observable, dist, n, seed)

        mean = complex(weights.mean())
        stderr = float(np.std(weights, ddof=1) / np.sqrt(n))
        second_moment = float(np.mean(np.abs(weights) ** 2))
        imag_residual = abs(mean.imag) if observable.is_hermitian() else None

        try:
            exact = self.povms.exact_expectation(detector, state, observable)
        except ParameterError:
            exact = None
        wall = time.perf_counter() - started

        logger.info(
            "Estimate computed",
            detector=detector.label,
            observable=observable_label,
            n=n,
            estimate=str(mean),
            stderr=stderr,
            wall_s=wall,
        )
        return EstimationReport(
            detector=detector.label,
            d=detector.dim_h,
            observable=observable_label,
            n=n,
            seed=seed,
            estimate_re=mean.real,
            estimate_im=mean.imag,
            stderr=stderr,
            exact_re=None if exact is None else exact.real,
            exact_im=None if exact is None else exact.imag,
            second_moment=second_moment,
            imag_residual=imag_residual,
            acceptance_rate=acceptance,
            wall_s=wall,
        )

    def convergence_scan(
        self,
        detector: UniversalDetector,
        state: State,
        observable: Operator,
        schedule: Sequence[int],
        seed: int,
        observable_label: str = "custom",
    ) -> List[EstimationReport]:
        """One report per n in a strictly increasing schedule, all from the same seed"""
        schedule = list(schedule)
        if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
            raise ParameterError(f"Schedule must be non-empty and strictly increasing, got {schedule}")
        return [
            self.estimate(detector, state, observable, n, seed, observable_label=observable_label)
            for n in schedule
        ]
