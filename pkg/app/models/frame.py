"""
Operator families, their duals and the frame map
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from app.exceptions import DimensionError
from app.models.operator import Operator


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """
    Indexed family {Ξ_i} of operators sharing one shape.

    Members are also kept stacked as an (N, h, k) array; ``vectors`` is the
    (N, h·k) matrix of vectorised members in the joint ordering of
    ``operator_algebra.vectorize``.
    """

    members: Tuple[Operator, ...]
    labels: Tuple[str, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise DimensionError("Operator family must be non-empty")
        dims = members[0].dims
        for i, member in enumerate(members):
            if member.dims != dims:
                raise DimensionError(
                    f"Member {i} has dims {member.dims}, expected {dims}",
                    index=i,
                    dims=member.dims,
                    expected=dims,
                )
        labels = tuple(self.labels) if self.labels else tuple(str(i) for i in range(len(members)))
        if len(labels) != len(members):
            raise DimensionError(
                f"{len(labels)} labels for {len(members)} members",
                labels=len(labels),
                members=len(members),
            )
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_stack(cls, stack: np.ndarray, labels: Optional[Sequence[str]] = None) -> "OperatorFamily":
        """Build a family from an (N, h, k) array"""
        stack = np.asarray(stack, dtype=np.complex128)
        if stack.ndim != 3:
            raise DimensionError(f"Expected an (N, h, k) stack, got shape {stack.shape}", shape=stack.shape)
        return cls(tuple(Operator(m) for m in stack), tuple(labels) if labels is not None else ())

    @property
    def dims(self) -> Tuple[int, int]:
        return self.members[0].dims

    @property
    def space_dimension(self) -> int:
        """Dimension h·k of the operator space the family lives in"""
        h, k = self.dims
        return h * k

    def __len__(self) -> int:
        return len(self.members)

    def stack(self) -> np.ndarray:
        return np.stack([m.entries for m in self.members])

    def vectors(self) -> np.ndarray:
        return self.stack().reshape(len(self), -1)

    def __repr__(self) -> str:
        return f"<OperatorFamily(size={len(self)}, dims={self.dims})>"


@dataclass(frozen=True, eq=False)
class DualFamily:
    """Family {Θ_i} aligned one-to-one with an OperatorFamily"""

    family: OperatorFamily
    members: Tuple[Operator, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if len(members) != len(self.family):
            raise DimensionError(
                f"Dual has {len(members)} members for a family of {len(self.family)}",
                dual=len(members),
                family=len(self.family),
            )
        for member in members:
            if member.dims != self.family.dims:
                raise DimensionError(
                    f"Dual member dims {member.dims} differ from family dims {self.family.dims}",
                    dims=member.dims,
                    expected=self.family.dims,
                )
        object.__setattr__(self, "members", members)

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.family.labels

    def __len__(self) -> int:
        return len(self.members)

    def as_family(self) -> OperatorFamily:
        return OperatorFamily(self.members, self.family.labels)

    def vectors(self) -> np.ndarray:
        return np.stack([m.entries for m in self.members]).reshape(len(self), -1)

    def __repr__(self) -> str:
        return f"<DualFamily(size={len(self)}, dims={self.family.dims})>"


@dataclass(frozen=True, eq=False)
class FrameMap:
    """S = Σ_i |Ξ_i>><<Ξ_i| acting on vectorised operators"""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=np.complex128, copy=True)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"Frame map must be square, got {matrix.shape}", shape=matrix.shape)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)[::-1]

    def is_tight(self, atol: float = 1e-10) -> bool:
        scale = np.trace(self.matrix).real / self.dimension
        return bool(np.allclose(self.matrix, scale * np.eye(self.dimension), atol=atol, rtol=0.0))


@dataclass(frozen=True)
class SpanningReport:
    """Outcome of a spanning test"""

    spans: bool
    rank: int
    dimension: int
    least_singular_value: float
    threshold: float

    @property
    def deficiency(self) -> int:
        return self.dimension - self.rank
