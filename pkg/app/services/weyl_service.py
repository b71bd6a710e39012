"""
Weyl-Heisenberg Bell detector

U_{m,n} = Σ_k e^{2πikm/d}|k><k⊕n| is a projective representation of
Z_d×Z_d; its d² Bell projectors form an orthogonal POVM on H⊗H that is
universal for any ancilla with Tr[U†_{m,n}νᵀ] ≠ 0 for every (m, n).
"""
from typing import Any, Dict, Iterator, Optional

import numpy as np
import structlog

from app.config import settings
from app.exceptions import AncillaError, DimensionError, ParameterError, VanishingDenominatorError
from app.models.groups import WeylGroup
from app.models.operator import Operator, State, state_problems
from app.models.povm import DiscreteProcessingRule, Povm, UniversalDetector, outcome_labels
from app.services.operator_algebra import random_haar_unitary

logger = structlog.get_logger(__name__)

TRACE_ROUNDOFF = 16 * np.finfo(np.float64).eps


def weyl_unitary(d: int, m: int, n: int) -> Operator:
    if d < 1 or not (0 <= m < d and 0 <= n < d):
        raise ParameterError(f"Weyl indices ({m},{n}) outside [0,{d})", d=d, m=m, n=n)
    k = np.arange(d)
    entries = np.zeros((d, d), dtype=np.complex128)
    entries[k, (k + n) % d] = np.exp(2j * np.pi * k * m / d)
    return Operator(entries)


def weyl_stack(d: int) -> np.ndarray:
    """All U_{m,n} as a (d², d, d) array in index order m·d + n"""
    group = WeylGroup(d)
    return np.stack([weyl_unitary(d, m, n).entries for m, n in group.pairs()])


def weyl_cocycle(d: int, alpha, beta) -> float:
    return WeylGroup(d).cocycle(alpha, beta)


def cocycle_sum(d: int, gamma, beta) -> complex:
    """Σ_α e^{ic(α,γ)} e^{ic(β,α)}, which is d²·δ_{γβ}"""
    group = WeylGroup(d)
    return complex(
        sum(np.exp(1j * (group.cocycle(alpha, gamma) + group.cocycle(beta, alpha))) for alpha in group.pairs())
    )


def weyl_bell_povm(d: int) -> Povm:
    """Π_{m,n} = |U_{m,n}>><<U_{m,n}|/d"""
    if d < 2:
        raise ParameterError(f"Weyl Bell POVM needs d ≥ 2, got {d}", d=d)
    vectors = weyl_stack(d).reshape(d * d, -1)
    elements = np.einsum("ni,nj->nij", vectors, vectors.conj()) / d
    return Povm(
        tuple(Operator(e) for e in elements),
        dims=(d, d),
        labels=outcome_labels(list(WeylGroup(d).pairs())),
    )


def weyl_traces(d: int, a: Operator) -> np.ndarray:
    """
    t[p, q] = Tr[U†_{p,q} A]

    Entries at round-off level are set to exactly zero, so Weyl operators
    (and I in particular) have exactly one non-zero trace.
    """
    if a.dims != (d, d):
        raise DimensionError(f"Operator dims {a.dims} differ from {(d, d)}", dims=a.dims, expected=(d, d))
    traces = np.einsum("nij,nij->n", weyl_stack(d).conj(), np.broadcast_to(a.entries, (d * d, d, d))).reshape(d, d)
    cutoff = TRACE_ROUNDOFF * d * np.abs(a.entries).max(initial=0.0)
    traces[np.abs(traces) <= cutoff] = 0.0
    return traces


class WeylClosedFormProcessing(DiscreteProcessingRule):
    """
    f_{m,n}(ν,O) = (1/d) Σ_{p,q} Tr[U†_{p,q}O] e^{2πi(mq−np)/d} / Tr[U†_{p,q}νᵀ]
    """

    kind = "weyl-closed-form"

    def __init__(self, d: int, ancilla: State, denominator_guard: Optional[float] = None):
        self.d = d
        self.ancilla = ancilla
        self.denominator_guard = settings.denominator_guard if denominator_guard is None else denominator_guard
        self.denominators = weyl_traces(d, ancilla.op.transpose())
        # U_{0,0} = I and Tr ν = 1
        self.denominators[0, 0] = 1.0

        small = np.abs(self.denominators) <= self.denominator_guard
        if small.any():
            p, q = (int(v) for v in np.argwhere(small)[0])
            raise VanishingDenominatorError(
                f"|Tr[U†_({p},{q}) νᵀ]| = {abs(self.denominators[p, q]):.3e} is below the guard "
                f"{self.denominator_guard:.1e}",
                p=p,
                q=q,
                value=float(abs(self.denominators[p, q])),
            )

        k = np.arange(d)
        self._phases = np.exp(2j * np.pi * np.outer(k, k) / d)

    def coefficients(self, observable: Operator) -> np.ndarray:
        ratios = weyl_traces(self.d, observable) / self.denominators
        f = np.einsum("mq,np,pq->mn", self._phases, self._phases.conj(), ratios) / self.d
        return f.reshape(-1)

    def params(self) -> Dict[str, Any]:
        return {"d": self.d, "denominator_guard": self.denominator_guard}


class WeylService:
    """Ancilla choice, processing and detector assembly for the Weyl Bell POVM"""

    def __init__(
        self,
        denominator_guard: Optional[float] = None,
        ancilla_mixing: Optional[float] = None,
        ancilla_search_attempts: Optional[int] = None,
        tolerance: Optional[float] = None,
    ):
        self.denominator_guard = settings.denominator_guard if denominator_guard is None else denominator_guard
        self.ancilla_mixing = settings.ancilla_mixing if ancilla_mixing is None else ancilla_mixing
        self.ancilla_search_attempts = (
            settings.ancilla_search_attempts if ancilla_search_attempts is None else ancilla_search_attempts
        )
        self.tolerance = settings.tolerance if tolerance is None else tolerance

    def _candidates(self, d: int) -> Iterator[tuple]:
        unitaries = weyl_stack(d)
        yield "group-sum", np.eye(d) / d + unitaries[1:].sum(axis=0) / (d * (d * d - 1))

        eps = self.ancilla_mixing
        k = np.arange(d)
        chi = (k + 1) * np.exp(1j * np.pi * k * k / d)
        chi = chi / np.linalg.norm(chi)
        yield "quadratic-phase", (1 - eps) * np.outer(chi, chi.conj()) + eps * np.eye(d) / d

        for seed in range(self.ancilla_search_attempts):
            chi = random_haar_unitary(d, seed).entries[:, 0]
            yield f"seeded:{seed}", (1 - eps) * np.outer(chi, chi.conj()) + eps * np.eye(d) / d

    def min_denominator(self, d: int, ancilla: State) -> float:
        return float(np.min(np.abs(weyl_traces(d, ancilla.op.transpose()))))

    def weyl_ancilla(self, d: int) -> State:
        """
        First admissible ancilla from the candidate chain

        Candidates are tried in order: the normalised group sum
        I/d + Σ_{α≠0} U_α/(d(d²−1)), the quadratic-phase state, then seeded
        Haar-random pure states mixed with I/d. A candidate is admissible when
        it is a valid state and every |Tr[U†_{m,n}νᵀ]| exceeds the guard.

        Raises:
            AncillaError: no candidate passed
        """
        if d < 2:
            raise ParameterError(f"Weyl ancilla needs d ≥ 2, got {d}", d=d)

        for name, matrix in self._candidates(d):
            problems = state_problems(Operator(matrix), self.tolerance)
            if problems:
                logger.info("Rejected ancilla candidate", d=d, candidate=name, problems=problems)
                continue
            state = State(Operator(matrix), tolerance=self.tolerance)
            smallest = self.min_denominator(d, state)
            if smallest <= self.denominator_guard:
                logger.info("Rejected ancilla candidate", d=d, candidate=name, min_denominator=smallest)
                continue
            logger.info("Selected Weyl ancilla", d=d, candidate=name, min_denominator=smallest)
            return state

        raise AncillaError(
            f"No admissible Weyl ancilla found for d={d}; supply one explicitly",
            d=d,
            attempts=self.ancilla_search_attempts,
        )

    def weyl_processing(self, d: int, ancilla: State, observable: Operator) -> np.ndarray:
        return WeylClosedFormProcessing(d, ancilla, self.denominator_guard).coefficients(observable)

    def build_processing(self, d: int, ancilla: State) -> WeylClosedFormProcessing:
        return WeylClosedFormProcessing(d, ancilla, self.denominator_guard)

    def build_detector(self, d: int, ancilla: Optional[State] = None) -> UniversalDetector:
        ancilla = ancilla or self.weyl_ancilla(d)
        return UniversalDetector(
            povm=weyl_bell_povm(d),
            ancilla=ancilla,
            processing=self.build_processing(d, ancilla),
            label=f"weyl:d={d}",
            metadata={"d": d},
        )
