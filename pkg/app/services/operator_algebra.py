"""
Dense operator algebra: vectorisation, tensor products, partial traces,
spectral decompositions and seeded random sampling.

Joint indices are row-major with the system index major and the ancilla
index minor, so |A>> has amplitude A[n, m] at position n·dimK + m and
``np.kron`` is the matching tensor product.
"""
from typing import NamedTuple, Optional, Tuple

import numpy as np
import scipy.linalg
import structlog

from app.config import settings
from app.exceptions import (
    DimensionError, HermiticityError, NormalityError, ParameterError
)
from app.models.operator import BipartiteVector, Operator, State

logger = structlog.get_logger(__name__)

OVER_H = "over-H"
OVER_K = "over-K"


class Eigensystem(NamedTuple):
    """Eigenvalues and orthonormal eigenvectors (as columns)"""

    values: np.ndarray
    vectors: np.ndarray


def vectorize(a: Operator) -> BipartiteVector:
    """|A>> = Σ_{n,m} A_{nm} |n>⊗|m>"""
    return BipartiteVector(a.entries.reshape(-1), dims=a.dims)


def devectorize(v: BipartiteVector) -> Operator:
    """Inverse of ``vectorize``"""
    h, k = v.dims
    if v.amplitudes.size != h * k:
        raise DimensionError(
            f"Vector of length {v.amplitudes.size} cannot be reshaped to {(h, k)}",
            length=v.amplitudes.size,
            dims=(h, k),
        )
    return Operator(v.amplitudes.reshape(h, k))


def tensor_product(a: Operator, b: Operator) -> Operator:
    """A⊗B with A⊗B|C>> = |A C Bᵀ>>"""
    factors = (a.dim_h, b.dim_h) if a.is_square and b.is_square else None
    return Operator(np.kron(a.entries, b.entries), factors=factors)


def partial_trace(
    m: Operator,
    side: str,
    factors: Optional[Tuple[int, int]] = None,
) -> Operator:
    """
    Partial trace of an operator on H⊗K.

    Args:
        m: square joint operator
        side: "over-K" keeps H, "over-H" keeps K
        factors: (dimH, dimK); defaults to ``m.factors``

    Returns:
        Reduced operator; Tr_K[|A>><<B|] = AB† and Tr_H[|A>><<B|] = AᵀB*
    """
    factors = factors or m.factors
    if factors is None:
        raise DimensionError("Partial trace needs the (dimH, dimK) factorisation", dims=m.dims)
    h, k = factors
    if not m.is_square or h * k != m.dim_h:
        raise DimensionError(
            f"Operator of dims {m.dims} does not factor as {(h, k)}",
            dims=m.dims,
            factors=(h, k),
        )

    blocks = m.entries.reshape(h, k, h, k)
    if side == OVER_K:
        return Operator(np.trace(blocks, axis1=1, axis2=3))
    if side == OVER_H:
        return Operator(np.trace(blocks, axis1=0, axis2=2))
    raise ParameterError(f"Unknown partial trace side '{side}'", side=side)


def _descending(values: np.ndarray) -> np.ndarray:
    """Order by real part, then imaginary part, both descending"""
    values = np.asarray(values)
    return np.lexsort((-np.imag(values), -np.real(values)))


def hermitian_eig(a: Operator, tolerance: Optional[float] = None) -> Eigensystem:
    """Spectral decomposition of a Hermitian operator, eigenvalues descending"""
    tolerance = settings.tolerance if tolerance is None else tolerance
    if not a.is_square:
        raise DimensionError(f"Eigen-decomposition needs a square operator, got {a.dims}", dims=a.dims)
    asymmetry = a.hermitian_defect()
    if asymmetry > tolerance:
        raise HermiticityError(
            f"Operator is not Hermitian: max asymmetry {asymmetry:.3e} exceeds {tolerance:.1e}",
            max_asymmetry=asymmetry,
        )

    hermitian_part = (a.entries + a.entries.conj().T) / 2
    values, vectors = scipy.linalg.eigh(hermitian_part)
    return Eigensystem(values[::-1].copy(), vectors[:, ::-1].copy())


def normal_eig(a: Operator, tolerance: Optional[float] = None) -> Eigensystem:
    """
    Unitary diagonalisation A = V diag(c) V† of a normal operator.

    Uses the complex Schur form, which is diagonal exactly when A is normal,
    so degenerate eigenspaces still come out orthonormal.
    """
    tolerance = settings.tolerance if tolerance is None else tolerance
    if not a.is_square:
        raise DimensionError(f"Eigen-decomposition needs a square operator, got {a.dims}", dims=a.dims)
    commutator = a.normality_defect()
    if commutator > tolerance:
        raise NormalityError(
            f"Operator is not normal: ‖AA† − A†A‖ = {commutator:.3e} exceeds {tolerance:.1e}",
            commutator_norm=commutator,
        )

    schur_form, basis = scipy.linalg.schur(a.entries, output="complex")
    values = np.diag(schur_form).copy()
    order = _descending(values)
    return Eigensystem(values[order], basis[:, order])


def haar_unitaries(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """
    ``count`` Haar-distributed dim×dim unitaries, shape (count, dim, dim).

    QR of a complex Ginibre matrix with the phases of diag(R) absorbed into Q.
    """
    if dim < 1:
        raise ParameterError(f"Dimension must be positive, got {dim}", dim=dim)
    ginibre = (rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(ginibre)
    diagonal = np.diagonal(r, axis1=-2, axis2=-1)
    phases = diagonal / np.abs(diagonal)
    return q * phases[:, np.newaxis, :]


def random_haar_unitary(dim: int, seed: int) -> Operator:
    """Haar-random unitary, deterministic per seed"""
    rng = np.random.default_rng(seed)
    return Operator(haar_unitaries(dim, 1, rng)[0])


def random_density(dim: int, rank: int, seed: int) -> State:
    """Random density matrix of the given rank, deterministic per seed"""
    if dim < 1 or not 1 <= rank <= dim:
        raise ParameterError(f"Rank {rank} outside [1, {dim}]", rank=rank, dim=dim)
    rng = np.random.default_rng(seed)
    ginibre = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = ginibre @ ginibre.conj().T
    rho = (rho + rho.conj().T) / 2
    rho /= np.trace(rho).real
    return State(Operator(rho))


def random_operator(dim_h: int, dim_k: Optional[int] = None, seed: int = 0, hermitian: bool = False) -> Operator:
    """Complex Gaussian operator, optionally Hermitian"""
    rng = np.random.default_rng(seed)
    dim_k = dim_k or dim_h
    entries = rng.standard_normal((dim_h, dim_k)) + 1j * rng.standard_normal((dim_h, dim_k))
    if hermitian:
        if dim_h != dim_k:
            raise DimensionError("Hermitian operators must be square", dims=(dim_h, dim_k))
        entries = (entries + entries.conj().T) / 2
    return Operator(entries)
