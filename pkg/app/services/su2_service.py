"""
SU(2) Bell detector on the spin-j irreducible representation

Group elements are U(ψ, n) = exp(iψ n·J) with ψ ∈ [0, 2π] and n on the unit
sphere; the normalised invariant measure is sin²(ψ/2)dψ dn / (4π²) and the
Bell POVM density against it is (2j+1)|U>><<U|. The continuous POVM is
discretised on a product quadrature that integrates U⊗U* exactly, so the
grid family is a finite frame with the same span.
"""
from fractions import Fraction
from typing import Optional, Tuple, Union

import numpy as np
import scipy.linalg
import structlog

from app.config import settings
from app.exceptions import AncillaError, DimensionError, NotUniversalError, ParameterError, SpanningError
from app.models.frame import OperatorFamily
from app.models.groups import QuadratureGrid, SpinSystem
from app.models.operator import Operator, State
from app.models.povm import ContinuousBellPovm, UniversalDetector
from app.services.frame_service import FrameService
from app.services.povm_service import GenericDualProcessing

logger = structlog.get_logger(__name__)

HAAR_MEASURE = "haar"
SWAPPED_MEASURE = "swapped"

SpinLike = Union[str, float, int, Fraction]


def spin_coherent(sys: SpinSystem, psi: float, phi: float, m: SpinLike) -> np.ndarray:
    """D(ψ,φ)|m> with D = exp(i(ψ/2)(J₊e^{−iφ} + J₋e^{iφ}))"""
    row = sys.m_index(m)
    generator = (psi / 2) * (sys.jp.entries * np.exp(-1j * phi) + sys.jm.entries * np.exp(1j * phi))
    return scipy.linalg.expm(1j * generator)[:, row]


def spin_coherent_batch(sys: SpinSystem, psi: np.ndarray, phi: np.ndarray, m: SpinLike) -> np.ndarray:
    """
    Coherent states for arrays of angles, shape (N, 2j+1).

    Uses D(ψ,φ) = e^{−iφJz} e^{iψJx} e^{iφJz} with J_x diagonalised once.
    """
    row = sys.m_index(m)
    psi, phi = np.broadcast_arrays(np.asarray(psi, dtype=float).ravel(), np.asarray(phi, dtype=float).ravel())
    ms = sys.ms
    eigenvalues, basis = np.linalg.eigh(sys.jx.entries)

    start = np.exp(1j * phi * ms[row])[:, np.newaxis] * np.eye(sys.dim)[row]
    rotated = np.einsum("ij,nj->ni", basis.conj().T, start)
    rotated = np.exp(1j * np.outer(psi, eigenvalues)) * rotated
    rotated = np.einsum("ij,nj->ni", basis, rotated)
    return np.exp(-1j * np.outer(phi, ms)) * rotated


def spin_coherent_completeness(
    sys: SpinSystem,
    m: SpinLike,
    n_polar: int = 200,
    n_azimuth: int = 200,
    measure: str = HAAR_MEASURE,
) -> Operator:
    """
    (2j+1)/(4π) ∫ |ψ,φ;m><ψ,φ;m| over the sphere by product quadrature

    ``measure="haar"`` takes ψ ∈ [0,π] as the polar angle with weight sin ψ
    and φ ∈ [0,2π) as the azimuth, which resolves the identity for every j.
    ``measure="swapped"`` swaps the roles (ψ ∈ [0,2π) flat, φ ∈ [0,π] with
    weight sin φ); that ordering resolves the identity only for j = 1/2.
    """
    polar_x, polar_w = np.polynomial.legendre.leggauss(n_polar)
    polar = np.arccos(polar_x)
    azimuth = 2 * np.pi * (np.arange(n_azimuth) + 0.5) / n_azimuth
    azimuth_w = np.full(n_azimuth, 2 * np.pi / n_azimuth)

    if measure == HAAR_MEASURE:
        psi, phi = np.meshgrid(polar, azimuth, indexing="ij")
    elif measure == SWAPPED_MEASURE:
        phi, psi = np.meshgrid(polar, azimuth, indexing="ij")
    else:
        raise ParameterError(f"Unknown completeness measure '{measure}'", measure=measure)
    weights = np.outer(polar_w, azimuth_w).ravel()

    states = spin_coherent_batch(sys, psi.ravel(), phi.ravel(), m)
    total = np.einsum("n,ni,nj->ij", weights, states, states.conj())
    return Operator(sys.dim / (4 * np.pi) * total)


def _unit_axis(n) -> np.ndarray:
    axis = np.asarray(n, dtype=float).reshape(-1)
    if axis.size != 3:
        raise ParameterError(f"Rotation axis must have 3 components, got {axis.size}", size=axis.size)
    norm = np.linalg.norm(axis)
    if abs(norm - 1.0) > 1e-9:
        raise ParameterError(f"Rotation axis is not a unit vector (norm {norm:.12f})", norm=float(norm))
    return axis


def su2_unitary(sys: SpinSystem, psi: float, n) -> Operator:
    """U(ψ, n) = exp(iψ n·J)"""
    nx, ny, nz = _unit_axis(n)
    generator = nx * sys.jx.entries + ny * sys.jy.entries + nz * sys.jz.entries
    return Operator(scipy.linalg.expm(1j * psi * generator))


def su2_unitaries(sys: SpinSystem, psi: np.ndarray, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """
    exp(iψ n·J) for n = (sinθ cosφ, sinθ sinφ, cosθ), shape (N, 2j+1, 2j+1).

    Built as R e^{iψJz} R† with R = e^{−iφJz} e^{−iθJy}.
    """
    psi, theta, phi = (np.asarray(a, dtype=float).ravel() for a in (psi, theta, phi))
    ms = sys.ms
    eigenvalues, basis = np.linalg.eigh(sys.jy.entries)

    tilt = np.einsum("ij,nj,kj->nik", basis, np.exp(-1j * np.outer(theta, eigenvalues)), basis.conj())
    rotation = np.exp(-1j * np.outer(phi, ms))[:, :, np.newaxis] * tilt
    spin = np.exp(1j * np.outer(psi, ms))[:, np.newaxis, :]
    return (rotation * spin) @ np.conj(np.swapaxes(rotation, 1, 2))


def su2_bell_element(sys: SpinSystem, psi: float, n) -> Operator:
    """|U(ψ,n)>><<U(ψ,n)|, rank one with trace 2j+1"""
    vector = su2_unitary(sys, psi, n).entries.reshape(-1)
    return Operator(np.outer(vector, vector.conj()), factors=(sys.dim, sys.dim))


def su2_grid(n_psi: int, n_theta: int, n_phi: int) -> QuadratureGrid:
    """
    Product quadrature for sin²(ψ/2)dψ sinθ dθ dφ / (4π²)

    Midpoint rules in ψ and φ are exact for trigonometric polynomials below
    the node count; Gauss-Legendre in cos θ is exact for polynomials of
    degree below 2·n_theta.
    """
    if min(n_psi, n_theta, n_phi) < 1:
        raise ParameterError(f"Grid sizes must be positive, got {(n_psi, n_theta, n_phi)}")
    psi = 2 * np.pi * (np.arange(n_psi) + 0.5) / n_psi
    psi_w = np.sin(psi / 2) ** 2 * (2 * np.pi / n_psi)
    cos_theta, theta_w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(cos_theta)
    phi = 2 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    phi_w = np.full(n_phi, 2 * np.pi / n_phi)

    grid_psi, grid_theta, grid_phi = np.meshgrid(psi, theta, phi, indexing="ij")
    weights = np.einsum("a,b,c->abc", psi_w, theta_w, phi_w).ravel()
    return QuadratureGrid(
        psi=grid_psi.ravel(),
        theta=grid_theta.ravel(),
        phi=grid_phi.ravel(),
        weights=weights / weights.sum(),
        shape=(n_psi, n_theta, n_phi),
    )


def grid_unitaries(sys: SpinSystem, grid: QuadratureGrid) -> np.ndarray:
    return su2_unitaries(sys, grid.psi, grid.theta, grid.phi)


def su2_resolution(sys: SpinSystem, grid: QuadratureGrid) -> Operator:
    """Σ_x (2j+1) μ_x |U_x>><<U_x|, which is I⊗I for an exact grid"""
    vectors = grid_unitaries(sys, grid).reshape(grid.size, -1)
    total = np.einsum("n,ni,nj->ij", sys.dim * grid.weights, vectors, vectors.conj())
    return Operator(total, factors=(sys.dim, sys.dim))


def su2_factorize(sys: SpinSystem, psi: float, n) -> Tuple[float, float, float]:
    """
    Parameters (ψ', φ', θ') with exp(iψ n·J) = D(ψ',φ') e^{2iθ'Jz}

    Solved in the spin-1/2 representation, where D(ψ',φ')e^{2iθ'Jz} has
    first row (cos(ψ'/2)e^{iθ'}, i sin(ψ'/2)e^{−i(φ'+θ')}), and valid for
    every j since both sides are images of the same SU(2) element.
    Branches: ψ' ∈ [0,π], φ', θ' ∈ [0,2π); φ' = 0 when ψ' = 0 and θ' = 0
    when ψ' = π.
    """
    fundamental = su2_unitary(SpinSystem.of(Fraction(1, 2)), psi, n).entries
    a, b = fundamental[0, 0], fundamental[0, 1]
    tiny = 1e-12

    psi_prime = float(2 * np.arctan2(abs(b), abs(a)))
    theta_prime = float(np.angle(a) % (2 * np.pi)) if abs(a) > tiny else 0.0
    phi_prime = float((-np.angle(-1j * b) - theta_prime) % (2 * np.pi)) if abs(b) > tiny else 0.0
    return psi_prime, phi_prime, theta_prime


def su2_compose(sys: SpinSystem, psi_prime: float, phi_prime: float, theta_prime: float) -> Operator:
    """D(ψ',φ') e^{2iθ'Jz}"""
    generator = np.cos(phi_prime) * sys.jx.entries + np.sin(phi_prime) * sys.jy.entries
    rotation = scipy.linalg.expm(1j * psi_prime * generator)
    phase = np.diag(np.exp(2j * theta_prime * sys.ms))
    return Operator(rotation @ phase)


class Su2Service:
    """Spin-j Bell detector assembly on a quadrature grid"""

    def __init__(
        self,
        grid_shape: Optional[Tuple[int, int, int]] = None,
        tolerance: Optional[float] = None,
        frame_service: Optional[FrameService] = None,
    ):
        self.grid_shape = tuple(settings.su2_grid if grid_shape is None else grid_shape)
        self.tolerance = settings.tolerance if tolerance is None else tolerance
        self.frames = frame_service or FrameService()

    def grid(self) -> QuadratureGrid:
        return su2_grid(*self.grid_shape)

    def default_ancilla(self, sys: SpinSystem) -> State:
        """ν = Σ_m p_m|m><m| with p ∝ 2^{−k}, k = j − m"""
        weights = 0.5 ** np.arange(sys.dim)
        return State(Operator(np.diag(weights / weights.sum()).astype(np.complex128)))

    def continuous_povm(self, sys: SpinSystem, grid: Optional[QuadratureGrid] = None) -> ContinuousBellPovm:
        return ContinuousBellPovm(group=ContinuousBellPovm.SU2, dim_h=sys.dim, spin=sys, grid=grid or self.grid())

    def _diagonal_populations(self, sys: SpinSystem, ancilla: State) -> np.ndarray:
        if ancilla.dim != sys.dim:
            raise AncillaError(f"Ancilla dimension {ancilla.dim} differs from 2j+1 = {sys.dim}", ancilla=ancilla.dim)
        matrix = ancilla.matrix
        off_diagonal = float(np.max(np.abs(matrix - np.diag(np.diag(matrix)))))
        if off_diagonal > self.tolerance:
            raise AncillaError(
                f"Ancilla must be diagonal in the J_z basis (off-diagonal {off_diagonal:.3e})",
                off_diagonal=off_diagonal,
            )
        populations = np.diag(matrix).real
        if np.min(populations) <= self.tolerance:
            raise AncillaError(
                f"Every population p_m must be positive, smallest is {np.min(populations):.3e}",
                min_population=float(np.min(populations)),
            )
        return populations

    def grid_family(self, sys: SpinSystem, ancilla: State, grid: QuadratureGrid) -> OperatorFamily:
        """Members (2j+1)μ_x U_x νᵀ U_x†"""
        unitaries = grid_unitaries(sys, grid)
        members = unitaries @ ancilla.matrix.T @ np.conj(np.swapaxes(unitaries, 1, 2))
        scale = (sys.dim * grid.weights)[:, np.newaxis, np.newaxis]
        return OperatorFamily.from_stack(scale * members)

    def build_processing(self, sys: SpinSystem, ancilla: State, grid: QuadratureGrid) -> GenericDualProcessing:
        self._diagonal_populations(sys, ancilla)
        family = self.grid_family(sys, ancilla, grid)
        try:
            dual = self.frames.canonical_dual(family)
        except SpanningError as exc:
            raise NotUniversalError(f"Grid {grid.shape} does not span: {exc.detail}", **exc.context) from exc
        return GenericDualProcessing(family, dual, extra={"group": "su2", "j": str(sys.j), "grid": list(grid.shape)})

    def su2_numeric_processing(
        self,
        sys: SpinSystem,
        ancilla: State,
        grid: QuadratureGrid,
        observable: Operator,
    ) -> np.ndarray:
        """f(x) = Tr[Θ(x)†O] for the canonical dual of the grid family"""
        if observable.dims != (sys.dim, sys.dim):
            raise DimensionError(f"Observable dims {observable.dims} differ from spin dimension {sys.dim}")
        return self.build_processing(sys, ancilla, grid).coefficients(observable)

    def build_detector(self, j: SpinLike, ancilla: Optional[State] = None) -> UniversalDetector:
        sys = SpinSystem.of(j)
        ancilla = ancilla or self.default_ancilla(sys)
        grid = self.grid()
        processing = self.build_processing(sys, ancilla, grid)
        logger.info("Built SU(2) detector", j=str(sys.j), grid=grid.shape, nodes=grid.size)
        return UniversalDetector(
            povm=self.continuous_povm(sys, grid),
            ancilla=ancilla,
            processing=processing,
            label=f"su2:j={sys.j}",
            metadata={"j": str(sys.j), "d": sys.dim},
        )
