"""
Group descriptors used by the detector constructors
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Iterator, Tuple, Union

import numpy as np

from app.exceptions import ParameterError
from app.models.operator import Operator

if TYPE_CHECKING:
    from app.models.frame import OperatorFamily
    from app.models.povm import Povm


@dataclass(frozen=True)
class WeylGroup:
    """
    Z_d × Z_d with its projective representation U_{m,n}.

    Outcome/element order is row-major in (m, n): index = m·d + n.
    """

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ParameterError(f"Weyl dimension must be positive, got {self.d}", d=self.d)

    def cocycle(self, alpha: Tuple[int, int], beta: Tuple[int, int]) -> float:
        """c((m,n),(m',n')) = 2π(n m' − m n')/d"""
        (m, n), (mp, np_) = alpha, beta
        return 2.0 * np.pi * ((n * mp - m * np_) % self.d) / self.d

    def pairs(self) -> Iterator[Tuple[int, int]]:
        for m in range(self.d):
            for n in range(self.d):
                yield (m, n)

    def index(self, m: int, n: int) -> int:
        return m * self.d + n

    @property
    def order(self) -> int:
        return self.d * self.d


def parse_spin(j: Union[str, float, int, Fraction]) -> Fraction:
    """Accept 1/2, "3/2", 1.5, 2 ... and return j as a Fraction"""
    try:
        value = Fraction(str(j)) if not isinstance(j, Fraction) else j
    except (ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"Invalid spin '{j}'", spin=str(j)) from exc
    if value <= 0 or (2 * value).denominator != 1:
        raise ParameterError(f"Spin must be a positive half-integer, got {j}", spin=str(j))
    return value


@dataclass(frozen=True, eq=False)
class SpinSystem:
    """
    Spin-j angular momentum operators on C^{2j+1}.

    Basis order is m = j, j−1, …, −j so that J_z = diag(j, …, −j).
    """

    j: Fraction
    jx: Operator
    jy: Operator
    jz: Operator
    jp: Operator
    jm: Operator

    @classmethod
    def of(cls, j: Union[str, float, int, Fraction]) -> "SpinSystem":
        spin = parse_spin(j)
        jf = float(spin)
        ms = jf - np.arange(int(2 * spin) + 1)
        dim = ms.size

        raising = np.zeros((dim, dim), dtype=np.complex128)
        for col in range(1, dim):
            m = ms[col]
            raising[col - 1, col] = np.sqrt(jf * (jf + 1) - m * (m + 1))
        lowering = raising.conj().T

        return cls(
            j=spin,
            jx=Operator((raising + lowering) / 2),
            jy=Operator((raising - lowering) / 2j),
            jz=Operator(np.diag(ms).astype(np.complex128)),
            jp=Operator(raising),
            jm=Operator(lowering),
        )

    @property
    def dim(self) -> int:
        return int(2 * self.j) + 1

    @property
    def ms(self) -> np.ndarray:
        return float(self.j) - np.arange(self.dim)

    def m_index(self, m: Union[str, float, Fraction]) -> int:
        """Row of |m> in the J_z basis"""
        try:
            value = Fraction(str(m)) if not isinstance(m, Fraction) else m
        except (ValueError, ZeroDivisionError) as exc:
            raise ParameterError(f"Invalid magnetic number '{m}'", m=str(m)) from exc
        offset = self.j - value
        if abs(value) > self.j or offset.denominator != 1:
            raise ParameterError(f"m = {m} is not a magnetic number of spin {self.j}", m=str(m), j=str(self.j))
        return int(offset)

    def __repr__(self) -> str:
        return f"<SpinSystem(j={self.j}, dim={self.dim})>"


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """
    Product quadrature on (ψ, θ, φ) for the SU(2) Bell measure.

    ``weights`` integrate against the normalised measure
    sin²(ψ/2) dψ sinθ dθ dφ / (4π²) and sum to one.
    """

    psi: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    shape: Tuple[int, int, int]

    def __post_init__(self):
        for name in ("psi", "theta", "phi", "weights"):
            array = np.array(getattr(self, name), dtype=np.float64, copy=True)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        sizes = {self.psi.size, self.theta.size, self.phi.size, self.weights.size}
        if len(sizes) != 1:
            raise ParameterError("Quadrature node arrays must have equal length")

    @property
    def size(self) -> int:
        return self.weights.size

    def axes(self) -> np.ndarray:
        """Unit vectors n(θ, φ) for every node, shape (N, 3)"""
        return np.stack(
            [
                np.sin(self.theta) * np.cos(self.phi),
                np.sin(self.theta) * np.sin(self.phi),
                np.cos(self.theta),
            ],
            axis=1,
        )


@dataclass(frozen=True, eq=False)
class LoccPovm:
    """
    Separable universal POVM Π_{k,l} = |c_k(l)><c_k(l)| ⊗ |l><l|.

    ``eigenvalues[l, k]`` is c_k(l); ``eigenvectors[l][:, k]`` is |c_k(l)>.
    """

    base: "OperatorFamily"
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    povm: "Povm"

    @property
    def dim_h(self) -> int:
        return self.base.dims[0]

    @property
    def size(self) -> int:
        """L, the number of base operators and the ancilla dimension"""
        return len(self.base)

    def element_index(self, k: int, l: int) -> int:
        return l * self.dim_h + k

    def __repr__(self) -> str:
        return f"<LoccPovm(d={self.dim_h}, L={self.size})>"

