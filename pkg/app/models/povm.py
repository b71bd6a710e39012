"""
POVM and detector domain models
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from app.exceptions import DimensionError
from app.models.groups import QuadratureGrid, SpinSystem
from app.models.operator import Operator, State


@dataclass(frozen=True, eq=False)
class Povm:
    """
    Finite POVM {Π_i} on H⊗K.

    Only structure is enforced here (non-empty, uniform joint dims);
    positivity and completeness are reported by PovmService.validate_povm.
    """

    elements: Tuple[Operator, ...]
    dims: Tuple[int, int]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        elements = tuple(self.elements)
        h, k = (int(v) for v in self.dims)
        if not elements:
            raise DimensionError("POVM must have at least one element")
        for i, element in enumerate(elements):
            if element.dims != (h * k, h * k):
                raise DimensionError(
                    f"Element {i} has dims {element.dims}, expected {(h * k, h * k)}",
                    index=i,
                    dims=element.dims,
                )
        elements = tuple(
            e if e.factors == (h, k) else Operator(e.entries, factors=(h, k)) for e in elements
        )
        labels = tuple(self.labels) if self.labels else tuple(str(i) for i in range(len(elements)))
        if len(labels) != len(elements):
            raise DimensionError(f"{len(labels)} labels for {len(elements)} elements")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "dims", (h, k))
        object.__setattr__(self, "labels", labels)

    @property
    def dim_h(self) -> int:
        return self.dims[0]

    @property
    def dim_k(self) -> int:
        return self.dims[1]

    def __len__(self) -> int:
        return len(self.elements)

    def stack(self) -> np.ndarray:
        return np.stack([e.entries for e in self.elements])

    def scaled(self, factor: float) -> "Povm":
        return Povm(tuple(e * factor for e in self.elements), self.dims, self.labels)

    def __repr__(self) -> str:
        return f"<Povm(outcomes={len(self)}, dims={self.dims})>"


@dataclass(frozen=True)
class PovmValidation:
    """Report of validate_povm"""

    passed: bool
    max_negative_eigenvalue: float
    completeness_defect: float
    trace_defect: float
    tolerance: float
    outcomes: int


@dataclass(frozen=True, eq=False)
class DiagonalizedElement:
    """Π = Σ_j |Ψ_j>><<Ψ_j| with Tr[Ψ_j†Ψ_j] the j-th retained eigenvalue"""

    vectors: Tuple[Operator, ...]
    eigenvalues: Tuple[float, ...]

    @property
    def rank(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True, eq=False)
class ContinuousBellPovm:
    """
    Bell POVM indexed by a compact group.

    ``group`` is "su(d)-haar" (density d·|U>><<U| against the normalised Haar
    measure) or "su2-uir" (density (2j+1)·|U(ψ,n)>><<U(ψ,n)| against the
    normalised sin²(ψ/2)dψ dn measure, integrated on ``grid``).
    """

    HAAR: ClassVar[str] = "su(d)-haar"
    SU2: ClassVar[str] = "su2-uir"

    group: str
    dim_h: int
    spin: Optional[SpinSystem] = None
    grid: Optional[QuadratureGrid] = None
    measure_weight: str = "haar"

    def __post_init__(self):
        if self.group not in (self.HAAR, self.SU2):
            raise DimensionError(f"Unknown continuous POVM group '{self.group}'", group=self.group)
        if self.group == self.SU2 and (self.spin is None or self.grid is None):
            raise DimensionError("SU(2) Bell POVM requires a spin system and a quadrature grid")
        if self.spin is not None and self.spin.dim != self.dim_h:
            raise DimensionError(
                f"Spin dimension {self.spin.dim} differs from dim_h {self.dim_h}",
                spin_dim=self.spin.dim,
                dim_h=self.dim_h,
            )

    @property
    def dims(self) -> Tuple[int, int]:
        return (self.dim_h, self.dim_h)

    @property
    def density_bound(self) -> float:
        """Upper bound of the outcome density against the proposal measure"""
        return float(self.dim_h)

    def __repr__(self) -> str:
        return f"<ContinuousBellPovm(group={self.group}, dim_h={self.dim_h})>"


class ProcessingRule(ABC):
    """Classical data processing f_i(ν, O) of a detector"""

    kind: ClassVar[str] = "abstract"

    @abstractmethod
    def outcome_weights(self, observable: Operator, outcomes: np.ndarray) -> np.ndarray:
        """Weights attached to sampled outcomes; their mean estimates Tr[ρO]"""

    @abstractmethod
    def params(self) -> Dict[str, Any]:
        """JSON-friendly description of the rule"""

    def exact_expectation(self, state: State, ancilla: State, observable: Operator) -> Optional[complex]:
        """Closed-form Σ_i f_i p_i when the rule can provide one without the POVM elements"""
        return None

    @property
    def is_discrete(self) -> bool:
        return isinstance(self, DiscreteProcessingRule)


class DiscreteProcessingRule(ProcessingRule):
    """Processing over a finite outcome set"""

    @abstractmethod
    def coefficients(self, observable: Operator) -> np.ndarray:
        """Coefficient vector f over all outcomes"""

    def outcome_weights(self, observable: Operator, outcomes: np.ndarray) -> np.ndarray:
        return self.coefficients(observable)[np.asarray(outcomes, dtype=np.intp)]


@dataclass(frozen=True, eq=False)
class UniversalDetector:
    """Joint measurement, ancilla preparation and processing rule"""

    povm: Union[Povm, ContinuousBellPovm]
    ancilla: State
    processing: ProcessingRule
    label: str = "custom"
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.ancilla.dim != self.povm.dims[1]:
            raise DimensionError(
                f"Ancilla dimension {self.ancilla.dim} differs from POVM ancilla space {self.povm.dims[1]}",
                ancilla=self.ancilla.dim,
                expected=self.povm.dims[1],
            )

    @property
    def dim_h(self) -> int:
        return self.povm.dims[0]

    @property
    def is_discrete(self) -> bool:
        return isinstance(self.povm, Povm) or self.processing.is_discrete

    def __repr__(self) -> str:
        return f"<UniversalDetector(label='{self.label}', kind={self.processing.kind}, dim_h={self.dim_h})>"


def outcome_labels(pairs: Sequence[Tuple[int, int]]) -> Tuple[str, ...]:
    return tuple(f"({a},{b})" for a, b in pairs)
