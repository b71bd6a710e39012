"""
Frame service: spanning tests, canonical duals and expansions
"""
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
import structlog

from app.config import settings
from app.exceptions import DimensionError, SpanningError
from app.models.frame import DualFamily, FrameMap, OperatorFamily, SpanningReport
from app.models.operator import Operator

logger = structlog.get_logger(__name__)


class FrameService:
    """
    Finite operator frames.

    A family {Ξ_i} is handled through the matrix X whose columns are the
    vectorised members; the frame map is S = X X† and the canonical dual is
    Θ = S⁻¹X = pinv(X)†, the minimal-norm choice of expansion coefficients.
    """

    def __init__(self, rank_rtol: Optional[float] = None):
        self.rank_rtol = settings.rank_rtol if rank_rtol is None else rank_rtol

    def _columns(self, family: OperatorFamily) -> np.ndarray:
        return family.vectors().T

    def frame_map(self, family: OperatorFamily) -> FrameMap:
        x = self._columns(family)
        return FrameMap(x @ x.conj().T)

    def spanning_report(self, family: OperatorFamily) -> SpanningReport:
        """Numerical rank of the stacked members against the operator-space dimension"""
        dimension = family.space_dimension
        singular_values = scipy.linalg.svdvals(self._columns(family))
        largest = float(singular_values[0]) if singular_values.size else 0.0
        threshold = largest * dimension * self.rank_rtol
        rank = int(np.count_nonzero(singular_values > threshold))
        least = float(singular_values[dimension - 1]) if singular_values.size >= dimension else 0.0

        return SpanningReport(
            spans=rank == dimension,
            rank=rank,
            dimension=dimension,
            least_singular_value=least,
            threshold=threshold,
        )

    def is_spanning(self, family: OperatorFamily) -> Tuple[bool, int]:
        report = self.spanning_report(family)
        return report.spans, report.rank

    def canonical_dual(self, family: OperatorFamily) -> DualFamily:
        """
        Canonical dual Θ_i = S⁻¹Ξ_i of a spanning family

        Raises:
            SpanningError: the family misses part of the operator space
        """
        report = self.spanning_report(family)
        if not report.spans:
            logger.warning(
                "Family does not span",
                rank=report.rank,
                dimension=report.dimension,
                least_singular_value=report.least_singular_value,
            )
            raise SpanningError(
                f"Family of {len(family)} operators spans rank {report.rank} of {report.dimension} "
                f"(deficiency {report.deficiency})",
                rank=report.rank,
                dimension=report.dimension,
                deficiency=report.deficiency,
                least_singular_value=report.least_singular_value,
            )

        x = self._columns(family)
        pseudo_inverse = scipy.linalg.pinv(x, atol=0.0, rtol=report.dimension * self.rank_rtol)
        dual_columns = pseudo_inverse.conj().T

        h, k = family.dims
        members = tuple(Operator(column.reshape(h, k)) for column in dual_columns.T)
        return DualFamily(family, members)

    def expand(self, a: Operator, family: OperatorFamily, dual: DualFamily) -> np.ndarray:
        """Coefficients Tr[Θ_i†A]"""
        if a.dims != family.dims or dual.family.dims != family.dims:
            raise DimensionError(
                f"Cannot expand an operator of dims {a.dims} in a family of dims {family.dims}",
                dims=a.dims,
                family=family.dims,
            )
        if len(dual) != len(family):
            raise DimensionError(
                f"Dual of size {len(dual)} does not match family of size {len(family)}",
                dual=len(dual),
                family=len(family),
            )
        return dual.vectors().conj() @ a.entries.reshape(-1)

    def reconstruct(self, coefficients: np.ndarray, family: OperatorFamily) -> Operator:
        """Σ_i c_i Ξ_i"""
        coefficients = np.asarray(coefficients)
        if coefficients.shape != (len(family),):
            raise DimensionError(
                f"{coefficients.size} coefficients for a family of {len(family)}",
                coefficients=coefficients.size,
                family=len(family),
            )
        return Operator(np.tensordot(coefficients, family.stack(), axes=1))
