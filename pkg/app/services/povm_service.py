"""
POVM service: validation, element diagonalisation, induced families,
universality and the generic dual processing rule
"""
from typing import Any, Dict, Optional, Tuple

import numpy as np
import structlog

from app.config import settings
from app.exceptions import (
    DimensionError, NotUniversalError, ParameterError, PositivityError, SpanningError
)
from app.models.frame import DualFamily, OperatorFamily, SpanningReport
from app.models.operator import BipartiteVector, Operator, State
from app.models.povm import (
    DiagonalizedElement, DiscreteProcessingRule, Povm, PovmValidation, UniversalDetector
)
from app.services.frame_service import FrameService
from app.services.operator_algebra import devectorize, hermitian_eig

logger = structlog.get_logger(__name__)


class GenericDualProcessing(DiscreteProcessingRule):
    """f_i = Tr[Θ_i†O] with {Θ_i} the canonical dual of the induced family"""

    kind = "generic-dual"

    def __init__(self, family: OperatorFamily, dual: DualFamily, extra: Optional[Dict[str, Any]] = None):
        self.family = family
        self.dual = dual
        self.extra = dict(extra or {})
        self._conjugate_dual = dual.vectors().conj()

    def coefficients(self, observable: Operator) -> np.ndarray:
        if observable.dims != self.family.dims:
            raise DimensionError(
                f"Observable dims {observable.dims} differ from system dims {self.family.dims}",
                dims=observable.dims,
                expected=self.family.dims,
            )
        return self._conjugate_dual @ observable.entries.reshape(-1)

    def exact_expectation(self, state: State, ancilla: State, observable: Operator) -> Optional[complex]:
        # p_i = Tr[(ρ⊗ν)Π_i] = Tr[ρ Ξ_i]
        probabilities = np.einsum("xa,nax->n", state.matrix, self.family.stack()).real
        return complex(self.coefficients(observable) @ probabilities)

    def params(self) -> Dict[str, Any]:
        return {"outcomes": len(self.family), **self.extra}


class PovmService:
    """
    Operations on finite POVMs {Π_i} over H⊗K
    """

    def __init__(
        self,
        tolerance: Optional[float] = None,
        eig_cutoff: Optional[float] = None,
        frame_service: Optional[FrameService] = None,
    ):
        self.tolerance = settings.tolerance if tolerance is None else tolerance
        self.eig_cutoff = settings.eig_cutoff if eig_cutoff is None else eig_cutoff
        self.frames = frame_service or FrameService()

    def validate_povm(self, povm: Povm, tolerance: Optional[float] = None) -> PovmValidation:
        """
        Check positivity and completeness; failures are reported, never raised.

        Returns:
            PovmValidation with the most negative eigenvalue over all elements
            (0 when none is negative) and the Frobenius and trace defects of
            Σ_i Π_i against the identity
        """
        tolerance = tolerance or self.tolerance
        stack = povm.stack()
        hermitian_defect = float(np.max(np.abs(stack - np.conj(np.swapaxes(stack, 1, 2)))))
        hermitian_parts = (stack + np.conj(np.swapaxes(stack, 1, 2))) / 2
        lowest = float(np.min(np.linalg.eigvalsh(hermitian_parts)))

        dim = stack.shape[1]
        total = stack.sum(axis=0)
        completeness_defect = float(np.linalg.norm(total - np.eye(dim)))
        trace_defect = float(abs(np.trace(total) - dim))

        max_negative = min(lowest, 0.0)
        passed = hermitian_defect <= tolerance and max_negative >= -tolerance and completeness_defect <= tolerance

        logger.info(
            "Validated POVM",
            outcomes=len(povm),
            dims=povm.dims,
            passed=passed,
            max_negative_eigenvalue=max_negative,
            completeness_defect=completeness_defect,
        )
        return PovmValidation(
            passed=passed,
            max_negative_eigenvalue=max_negative,
            completeness_defect=completeness_defect,
            trace_defect=trace_defect,
            tolerance=tolerance,
            outcomes=len(povm),
        )

    def diagonalize_element(
        self,
        element: Operator,
        factors: Optional[Tuple[int, int]] = None,
    ) -> DiagonalizedElement:
        """Π = Σ_j |Ψ_j>><<Ψ_j| with Ψ_j = devec(√λ_j v_j), λ_j above the cutoff"""
        factors = factors or element.factors
        if factors is None:
            raise DimensionError("Element needs its (dimH, dimK) factorisation", dims=element.dims)

        values, vectors = hermitian_eig(element, tolerance=self.tolerance)
        if values[-1] < -self.tolerance:
            raise PositivityError(
                f"Element is not positive: eigenvalue {values[-1]:.3e}",
                min_eigenvalue=float(values[-1]),
            )

        kept = values > self.eig_cutoff
        psis = tuple(
            devectorize(BipartiteVector(np.sqrt(value) * vectors[:, j], dims=factors))
            for j, value in zip(np.flatnonzero(kept), values[kept])
        )
        return DiagonalizedElement(vectors=psis, eigenvalues=tuple(float(v) for v in values[kept]))

    def induced_family(self, povm: Povm, ancilla: State) -> OperatorFamily:
        """Ξ_i[ν] = Tr_K[Π_i (I⊗ν)] = Σ_j Ψ_j νᵀ Ψ_j†"""
        h, k = povm.dims
        if ancilla.dim != k:
            raise DimensionError(
                f"Ancilla dimension {ancilla.dim} differs from POVM ancilla space {k}",
                ancilla=ancilla.dim,
                expected=k,
            )
        blocks = povm.stack().reshape(len(povm), h, k, h, k)
        members = np.einsum("nabxy,yb->nax", blocks, ancilla.matrix)
        return OperatorFamily.from_stack(members, povm.labels)

    def universality_report(self, povm: Povm, ancilla: State) -> SpanningReport:
        return self.frames.spanning_report(self.induced_family(povm, ancilla))

    def is_universal(self, povm: Povm, ancilla: State) -> Tuple[bool, int]:
        report = self.universality_report(povm, ancilla)
        return report.spans, report.rank

    def outcome_probabilities(self, povm: Povm, state: State, ancilla: State) -> np.ndarray:
        """Unnormalised p_i = Tr[(ρ⊗ν)Π_i]"""
        if (state.dim, ancilla.dim) != povm.dims:
            raise DimensionError(
                f"State dims {(state.dim, ancilla.dim)} differ from POVM dims {povm.dims}",
                dims=(state.dim, ancilla.dim),
                expected=povm.dims,
            )
        joint = np.kron(state.matrix, ancilla.matrix)
        return np.einsum("xy,nyx->n", joint, povm.stack()).real

    def build_detector(
        self,
        povm: Povm,
        ancilla: State,
        label: str = "custom",
        metadata: Optional[Dict[str, Any]] = None,
    ) -> UniversalDetector:
        """Detector with processing from the canonical dual of the induced family"""
        family = self.induced_family(povm, ancilla)
        try:
            dual = self.frames.canonical_dual(family)
        except SpanningError as exc:
            raise NotUniversalError(
                f"POVM with this ancilla is not universal: {exc.detail}",
                **exc.context,
            ) from exc

        logger.info("Built generic detector", label=label, outcomes=len(povm), dims=povm.dims)
        return UniversalDetector(
            povm=povm,
            ancilla=ancilla,
            processing=GenericDualProcessing(family, dual),
            label=label,
            metadata=dict(metadata or {}),
        )

    def processing_coefficients(self, detector: UniversalDetector, observable: Operator) -> np.ndarray:
        """f_i(ν, O) over the finite outcome set of ``detector``"""
        if not isinstance(detector.processing, DiscreteProcessingRule):
            raise ParameterError(
                f"Detector '{detector.label}' has a continuous outcome set; use outcome weights instead",
                detector=detector.label,
            )
        self._check_observable(detector, observable)
        return detector.processing.coefficients(observable)

    def exact_expectation(self, detector: UniversalDetector, state: State, observable: Operator) -> complex:
        """Σ_i f_i(ν,O) Tr[(ρ⊗ν)Π_i], which equals Tr[ρO] for a universal detector"""
        self._check_observable(detector, observable)
        if state.dim != detector.dim_h:
            raise DimensionError(
                f"State dimension {state.dim} differs from system dimension {detector.dim_h}",
                dims=state.dim,
                expected=detector.dim_h,
            )

        closed_form = detector.processing.exact_expectation(state, detector.ancilla, observable)
        if closed_form is not None:
            return closed_form
        if isinstance(detector.povm, Povm) and isinstance(detector.processing, DiscreteProcessingRule):
            probabilities = self.outcome_probabilities(detector.povm, state, detector.ancilla)
            return complex(detector.processing.coefficients(observable) @ probabilities)
        raise ParameterError(
            f"No exact evaluation available for detector '{detector.label}'",
            detector=detector.label,
        )

    @staticmethod
    def _check_observable(detector: UniversalDetector, observable: Operator) -> None:
        expected = (detector.dim_h, detector.dim_h)
        if observable.dims != expected:
            raise DimensionError(
                f"Observable dims {observable.dims} differ from system dims {expected}",
                dims=observable.dims,
                expected=expected,
            )
