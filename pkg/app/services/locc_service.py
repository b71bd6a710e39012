"""
Separable universal detector realised by local measurements and classical
communication: the ancilla is measured in its computational basis |l>, and
the system is then measured in the eigenbasis of the normal operator C(l).
"""
from typing import Any, Dict, Optional

import numpy as np
import structlog

from app.exceptions import (
    DimensionError, NormalityError, ParameterError, SpanningError, VanishingDenominatorError
)
from app.models.frame import DualFamily, OperatorFamily
from app.models.groups import LoccPovm
from app.models.operator import Operator, State
from app.models.povm import DiscreteProcessingRule, Povm, UniversalDetector
from app.services.frame_service import FrameService
from app.services.operator_algebra import normal_eig
from app.services.weyl_service import weyl_stack

logger = structlog.get_logger(__name__)

POPULATION_GUARD = 1e-9


def locc_povm_from_family(base: OperatorFamily, frame_service: Optional[FrameService] = None) -> LoccPovm:
    """Π_{k,l} = |c_k(l)><c_k(l)| ⊗ |l><l| for a spanning family of normal operators"""
    d, cols = base.dims
    if d != cols:
        raise DimensionError(f"Base operators must be square, got {base.dims}", dims=base.dims)
    size = len(base)
    if size < d * d:
        raise ParameterError(f"A spanning family needs L ≥ d² = {d * d}, got {size}", size=size, d=d)

    frames = frame_service or FrameService()
    spans, rank = frames.is_spanning(base)
    if not spans:
        raise SpanningError(
            f"Base family spans rank {rank} of {d * d}",
            rank=rank,
            dimension=d * d,
            deficiency=d * d - rank,
        )

    eigenvalues = np.empty((size, d), dtype=np.complex128)
    eigenvectors = np.empty((size, d, d), dtype=np.complex128)
    for l, member in enumerate(base.members):
        try:
            values, vectors = normal_eig(member)
        except NormalityError as exc:
            raise NormalityError(f"Base operator {base.labels[l]} is not normal: {exc.detail}", index=l) from exc
        eigenvalues[l], eigenvectors[l] = values, vectors

    elements = []
    labels = []
    for l in range(size):
        ancilla_projector = np.zeros((size, size), dtype=np.complex128)
        ancilla_projector[l, l] = 1.0
        for k in range(d):
            vector = eigenvectors[l][:, k]
            elements.append(Operator(np.kron(np.outer(vector, vector.conj()), ancilla_projector)))
            labels.append(f"({k},{l})")

    povm = Povm(tuple(elements), dims=(d, size), labels=tuple(labels))
    return LoccPovm(base=base, eigenvalues=eigenvalues, eigenvectors=eigenvectors, povm=povm)


def locc_povm(d: int) -> LoccPovm:
    """LOCC POVM built on the Weyl unitaries C(l) = U_{m,n}, l = m·d + n"""
    if d < 2:
        raise ParameterError(f"LOCC POVM needs d ≥ 2, got {d}", d=d)
    labels = tuple(f"U({m},{n})" for m in range(d) for n in range(d))
    return locc_povm_from_family(OperatorFamily.from_stack(weyl_stack(d), labels))


class LoccProcessing(DiscreteProcessingRule):
    """f_{k,l} = Tr[Θ(l)†O] c_k(l) / <l|ν|l> with {Θ(l)} the canonical dual of {C(l)}"""

    kind = "locc"

    def __init__(self, locc: LoccPovm, ancilla: State, dual: DualFamily):
        if ancilla.dim != locc.size:
            raise DimensionError(
                f"Ancilla dimension {ancilla.dim} differs from L = {locc.size}",
                ancilla=ancilla.dim,
                expected=locc.size,
            )
        populations = np.diag(ancilla.matrix).real
        small = populations <= POPULATION_GUARD
        if small.any():
            l = int(np.flatnonzero(small)[0])
            raise VanishingDenominatorError(
                f"<l|ν|l> = {populations[l]:.3e} vanishes for l = {l}",
                l=l,
                value=float(populations[l]),
            )
        self.locc = locc
        self.ancilla = ancilla
        self.dual = dual
        self.populations = populations
        self._conjugate_dual = dual.vectors().conj()

    def coefficients(self, observable: Operator) -> np.ndarray:
        d = self.locc.dim_h
        if observable.dims != (d, d):
            raise DimensionError(f"Observable dims {observable.dims} differ from {(d, d)}", dims=observable.dims)
        traces = self._conjugate_dual @ observable.entries.reshape(-1)
        f = traces[:, np.newaxis] * self.locc.eigenvalues / self.populations[:, np.newaxis]
        return f.reshape(-1)

    def params(self) -> Dict[str, Any]:
        return {"d": self.locc.dim_h, "L": self.locc.size}


class LoccService:
    """Assembly of the LOCC detector"""

    def __init__(self, frame_service: Optional[FrameService] = None):
        self.frames = frame_service or FrameService()

    def default_ancilla(self, d: int) -> State:
        return State.maximally_mixed(d * d)

    def locc_processing(self, locc: LoccPovm, ancilla: State, observable: Operator) -> np.ndarray:
        return self.build_processing(locc, ancilla).coefficients(observable)

    def build_processing(self, locc: LoccPovm, ancilla: State) -> LoccProcessing:
        return LoccProcessing(locc, ancilla, self.frames.canonical_dual(locc.base))

    def build_detector(self, d: int, ancilla: Optional[State] = None) -> UniversalDetector:
        locc = locc_povm(d)
        ancilla = ancilla or self.default_ancilla(d)
        logger.info("Built LOCC detector", d=d, L=locc.size)
        return UniversalDetector(
            povm=locc.povm,
            ancilla=ancilla,
            processing=self.build_processing(locc, ancilla),
            label=f"locc:d={d}",
            metadata={"d": d, "L": locc.size},
        )
