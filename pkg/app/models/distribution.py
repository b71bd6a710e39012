"""
Outcome distributions of a detector applied to ρ⊗ν
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, ClassVar, Optional

import numpy as np

from app.exceptions import ParameterError, PositivityError


@dataclass(frozen=True, eq=False)
class DiscreteOutcomeDistribution:
    """Exact outcome probabilities p_i = Tr[(ρ⊗ν)Π_i], renormalised"""

    probabilities: np.ndarray
    raw_total: float = 1.0

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=np.float64, copy=True).reshape(-1)
        if p.size == 0:
            raise ParameterError("Empty outcome distribution")
        if np.any(p < -1e-12):
            raise PositivityError(f"Negative outcome probability {p.min():.3e}", minimum=float(p.min()))
        p = np.clip(p, 0.0, None)
        total = float(p.sum())
        if total <= 0.0:
            raise PositivityError("Outcome probabilities sum to zero")
        p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def size(self) -> int:
        return self.probabilities.size


@dataclass(frozen=True, eq=False)
class ContinuousOutcomeDistribution:
    """
    Outcome density known up to sampling.

    ``propose(rng, size)`` draws from the proposal measure, ``density(x)``
    evaluates the outcome density against it and ``bound`` dominates it.
    """

    HAAR: ClassVar[str] = "haar"
    QUADRATURE: ClassVar[str] = "quadrature"

    proposal: str
    bound: float
    density: Callable[[np.ndarray], np.ndarray]
    propose: Callable[[np.random.Generator, int], np.ndarray]
    outcome_shape: tuple = ()


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """Sampled outcomes plus rejection-sampling bookkeeping"""

    outcomes: np.ndarray
    proposals: int
    acceptance_rate: Optional[float] = None

    def __len__(self) -> int:
        return len(self.outcomes)
