"""
Operator-level domain models

Operators are dense complex matrices mapping an input space K to an output
space H. Joint operators on H⊗K optionally remember their factorisation so
that partial traces can be taken without re-declaring subsystem dimensions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Number
from typing import List, Optional, Tuple

import numpy as np

from app.exceptions import DimensionError, InvalidStateError


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.complex128, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Operator:
    """
    Complex matrix with dimension metadata.

    Rows index the output space H, columns the input space K. ``factors``
    records a bipartite split (dimH, dimK) for square joint operators.
    """

    entries: np.ndarray
    factors: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        entries = np.asarray(self.entries)
        if entries.ndim != 2 or 0 in entries.shape:
            raise DimensionError(
                f"Operator entries must be a non-empty matrix, got shape {entries.shape}",
                shape=entries.shape,
            )
        object.__setattr__(self, "entries", _frozen(entries))

        if self.factors is not None:
            h, k = (int(v) for v in self.factors)
            rows, cols = self.entries.shape
            if rows != cols or h * k != rows:
                raise DimensionError(
                    f"Factors {(h, k)} do not split an operator of shape {self.entries.shape}",
                    factors=(h, k),
                    shape=self.entries.shape,
                )
            object.__setattr__(self, "factors", (h, k))

    # Construction helpers
    @classmethod
    def identity(cls, dim: int, factors: Optional[Tuple[int, int]] = None) -> "Operator":
        return cls(np.eye(dim, dtype=np.complex128), factors=factors)

    @classmethod
    def zeros(cls, dim_h: int, dim_k: Optional[int] = None) -> "Operator":
        return cls(np.zeros((dim_h, dim_k or dim_h), dtype=np.complex128))

    @classmethod
    def projector(cls, vector: np.ndarray) -> "Operator":
        """|v><v| for a (not necessarily normalised) vector"""
        v = np.asarray(vector, dtype=np.complex128).reshape(-1)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def basis_projector(cls, dim: int, k: int) -> "Operator":
        if not 0 <= k < dim:
            raise DimensionError(f"Basis index {k} outside [0, {dim})", index=k, dim=dim)
        entries = np.zeros((dim, dim), dtype=np.complex128)
        entries[k, k] = 1.0
        return cls(entries)

    # Dimensions
    @property
    def dims(self) -> Tuple[int, int]:
        return self.entries.shape

    @property
    def dim_h(self) -> int:
        return self.entries.shape[0]

    @property
    def dim_k(self) -> int:
        return self.entries.shape[1]

    @property
    def is_square(self) -> bool:
        return self.dim_h == self.dim_k

    def _require_square(self, what: str) -> None:
        if not self.is_square:
            raise DimensionError(f"{what} requires a square operator, got {self.dims}", dims=self.dims)

    # Algebra
    def adjoint(self) -> "Operator":
        return Operator(self.entries.conj().T, factors=self.factors)

    def transpose(self) -> "Operator":
        return Operator(self.entries.T, factors=self.factors)

    def conjugate(self) -> "Operator":
        return Operator(self.entries.conj(), factors=self.factors)

    def trace(self) -> complex:
        self._require_square("trace")
        return complex(np.trace(self.entries))

    def inner(self, other: "Operator") -> complex:
        """Hilbert-Schmidt product Tr[A†B]"""
        self._check_same_dims(other, "inner product")
        return complex(np.vdot(self.entries, other.entries))

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def hermitian_defect(self) -> float:
        self._require_square("hermiticity check")
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def is_hermitian(self, tolerance: float = 1e-9) -> bool:
        return self.is_square and self.hermitian_defect() <= tolerance

    def normality_defect(self) -> float:
        self._require_square("normality check")
        a = self.entries
        return float(np.linalg.norm(a @ a.conj().T - a.conj().T @ a))

    def allclose(self, other: "Operator", atol: float = 1e-9) -> bool:
        return self.dims == other.dims and bool(np.allclose(self.entries, other.entries, atol=atol, rtol=0.0))

    def _check_same_dims(self, other: "Operator", what: str) -> None:
        if self.dims != other.dims:
            raise DimensionError(
                f"Dimension mismatch in {what}: {self.dims} vs {other.dims}",
                left=self.dims,
                right=other.dims,
            )

    def __matmul__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        if self.dim_k != other.dim_h:
            raise DimensionError(
                f"Cannot compose {self.dims} with {other.dims}",
                left=self.dims,
                right=other.dims,
            )
        factors = self.factors if self.factors == other.factors else None
        return Operator(self.entries @ other.entries, factors=factors)

    def __add__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        self._check_same_dims(other, "addition")
        factors = self.factors if self.factors == other.factors else None
        return Operator(self.entries + other.entries, factors=factors)

    def __sub__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        self._check_same_dims(other, "subtraction")
        factors = self.factors if self.factors == other.factors else None
        return Operator(self.entries - other.entries, factors=factors)

    def __mul__(self, scalar: Number) -> "Operator":
        if not isinstance(scalar, Number):
            return NotImplemented
        return Operator(self.entries * scalar, factors=self.factors)

    __rmul__ = __mul__

    def __truediv__(self, scalar: Number) -> "Operator":
        if not isinstance(scalar, Number):
            return NotImplemented
        return Operator(self.entries / scalar, factors=self.factors)

    def __neg__(self) -> "Operator":
        return Operator(-self.entries, factors=self.factors)

    def __repr__(self) -> str:
        return f"<Operator(dims={self.dims}, factors={self.factors})>"


@dataclass(frozen=True, eq=False)
class BipartiteVector:
    """
    Vector |A>> in H⊗K, amplitudes in row-major joint order (system index major)
    """

    amplitudes: np.ndarray
    dims: Tuple[int, int]

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes).reshape(-1)
        h, k = (int(v) for v in self.dims)
        if h < 1 or k < 1:
            raise DimensionError(f"Invalid bipartite dims {(h, k)}", dims=(h, k))
        object.__setattr__(self, "amplitudes", _frozen(amplitudes))
        object.__setattr__(self, "dims", (h, k))

    def inner(self, other: "BipartiteVector") -> complex:
        if self.dims != other.dims:
            raise DimensionError(
                f"Dimension mismatch in inner product: {self.dims} vs {other.dims}",
                left=self.dims,
                right=other.dims,
            )
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self) -> str:
        return f"<BipartiteVector(dims={self.dims})>"


def state_problems(op: Operator, tolerance: float) -> List[str]:
    """Collect the density-matrix invariants ``op`` violates"""
    problems: List[str] = []
    if not op.is_square:
        return [f"not square: {op.dims}"]

    asymmetry = op.hermitian_defect()
    if asymmetry > tolerance:
        problems.append(f"not Hermitian (max asymmetry {asymmetry:.3e})")
        return problems

    hermitian_part = (op.entries + op.entries.conj().T) / 2
    min_eig = float(np.linalg.eigvalsh(hermitian_part)[0])
    if min_eig < -tolerance:
        problems.append(f"negative eigenvalue {min_eig:.3e}")

    trace_error = abs(op.trace() - 1.0)
    if trace_error > tolerance:
        problems.append(f"trace differs from 1 by {trace_error:.3e}")
    return problems


@dataclass(frozen=True, eq=False)
class State:
    """Density operator: Hermitian, positive and unit trace within ``tolerance``"""

    op: Operator
    tolerance: float = field(default=1e-9)

    def __post_init__(self):
        if self.tolerance < 0:
            raise InvalidStateError(f"Negative tolerance {self.tolerance}", tolerance=self.tolerance)
        problems = state_problems(self.op, self.tolerance)
        if problems:
            raise InvalidStateError(
                "Operator is not a valid state: " + "; ".join(problems),
                problems=problems,
            )

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, tolerance: float = 1e-9) -> "State":
        return cls(Operator(matrix), tolerance=tolerance)

    @classmethod
    def pure(cls, vector: np.ndarray, tolerance: float = 1e-9) -> "State":
        v = np.asarray(vector, dtype=np.complex128).reshape(-1)
        return cls(Operator.projector(v / np.linalg.norm(v)), tolerance=tolerance)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "State":
        return cls(Operator.identity(dim) / dim)

    @property
    def dim(self) -> int:
        return self.op.dim_h

    @property
    def matrix(self) -> np.ndarray:
        return self.op.entries

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def __repr__(self) -> str:
        return f"<State(dim={self.dim}, purity={self.purity():.4f})>"
