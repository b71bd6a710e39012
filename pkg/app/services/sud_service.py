"""
SU(d) Bell detector with Haar-distributed outcomes
"""
from typing import Any, Dict, Optional

import numpy as np
import structlog

from app.config import settings
from app.exceptions import AncillaError, DimensionError, NotUniversalError, ParameterError
from app.models.frame import OperatorFamily, SpanningReport
from app.models.operator import Operator, State
from app.models.povm import ContinuousBellPovm, ProcessingRule, UniversalDetector
from app.services.frame_service import FrameService
from app.services.operator_algebra import haar_unitaries

logger = structlog.get_logger(__name__)

FIDELITY_MARGIN = 1e-9


def _unit(vector, name: str) -> np.ndarray:
    v = np.asarray(vector, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-9:
        raise ParameterError(f"{name} must be a unit vector, norm is {norm:.6f}", vector=name, norm=float(norm))
    return v


def _fidelity(phi: np.ndarray, psi: np.ndarray) -> float:
    if phi.shape != psi.shape:
        raise DimensionError(f"φ and ψ have different lengths {phi.size} and {psi.size}")
    fidelity = float(abs(np.vdot(psi, phi)) ** 2)
    if fidelity >= 1.0 - FIDELITY_MARGIN:
        raise ParameterError(
            f"|<ψ|φ>|² = {fidelity:.12f} is too close to 1; ξ is degenerate",
            fidelity=fidelity,
        )
    return fidelity


def sud_xi(phi, psi) -> Operator:
    """ξ = d/(1−F)[(d−F)|φ><φ| − (d−1)|ψ><ψ|], F = |<ψ|φ>|²"""
    phi, psi = _unit(phi, "φ"), _unit(psi, "ψ")
    fidelity = _fidelity(phi, psi)
    d = phi.size
    xi = d / (1 - fidelity) * ((d - fidelity) * np.outer(phi, phi.conj()) - (d - 1) * np.outer(psi, psi.conj()))
    return Operator(xi)


def sud_processing_batch(phi, psi, unitaries: np.ndarray, observable: Operator) -> np.ndarray:
    """f(U) = d/(1−F)[(d−F)<φ|U†OU|φ> − (d−1)<ψ|U†OU|ψ>] for a stack of unitaries"""
    phi, psi = _unit(phi, "φ"), _unit(psi, "ψ")
    fidelity = _fidelity(phi, psi)
    d = phi.size
    unitaries = np.asarray(unitaries, dtype=np.complex128).reshape(-1, d, d)
    if observable.dims != (d, d):
        raise DimensionError(f"Observable dims {observable.dims} differ from {(d, d)}", dims=observable.dims)

    u_phi = unitaries @ phi
    u_psi = unitaries @ psi
    on_phi = np.einsum("ni,ij,nj->n", u_phi.conj(), observable.entries, u_phi)
    on_psi = np.einsum("ni,ij,nj->n", u_psi.conj(), observable.entries, u_psi)
    return d / (1 - fidelity) * ((d - fidelity) * on_phi - (d - 1) * on_psi)


def sud_processing(phi, psi, u: Operator, observable: Operator) -> complex:
    return complex(sud_processing_batch(phi, psi, u.entries[np.newaxis], observable)[0])


def haar_twirl_expectation(state: State, ancilla_t: np.ndarray, xi_dagger: np.ndarray, observable: Operator) -> complex:
    """
    ∫dU Tr[ρ U A U†] Tr[O U B U†] over the normalised Haar measure

    The second-moment twirl gives a·Tr ρ·Tr O + b·Tr[ρO] with
    a = (d TrA TrB − Tr AB)/(d(d²−1)) and b = (d Tr AB − TrA TrB)/(d(d²−1)).
    """
    d = state.dim
    tr_a, tr_b = np.trace(ancilla_t), np.trace(xi_dagger)
    tr_ab = np.trace(ancilla_t @ xi_dagger)
    scale = d * (d * d - 1)
    a = (d * tr_a * tr_b - tr_ab) / scale
    b = (d * tr_ab - tr_a * tr_b) / scale
    rho = state.matrix
    return complex(a * np.trace(rho) * observable.trace() + b * np.trace(rho @ observable.entries))


class SudXiProcessing(ProcessingRule):
    """
    Per-outcome weight f(U)/d for outcomes drawn from the density d·Tr[U†ρUνᵀ]
    """

    kind = "sud-xi"

    def __init__(self, phi, psi):
        self.phi = _unit(phi, "φ")
        self.psi = _unit(psi, "ψ")
        self.fidelity = _fidelity(self.phi, self.psi)
        self.d = self.phi.size

    def outcome_weights(self, observable: Operator, outcomes: np.ndarray) -> np.ndarray:
        return sud_processing_batch(self.phi, self.psi, outcomes, observable) / self.d

    def exact_expectation(self, state: State, ancilla: State, observable: Operator) -> Optional[complex]:
        xi = sud_xi(self.phi, self.psi)
        return haar_twirl_expectation(state, ancilla.matrix.T, xi.adjoint().entries, observable)

    def params(self) -> Dict[str, Any]:
        return {
            "d": self.d,
            "phi": {"re": self.phi.real.tolist(), "im": self.phi.imag.tolist()},
            "psi": {"re": self.psi.real.tolist(), "im": self.psi.imag.tolist()},
            "fidelity": self.fidelity,
        }


class SudService:
    """Construction and checks of the Haar Bell detector"""

    def __init__(self, universality_samples: Optional[int] = None, frame_service: Optional[FrameService] = None):
        self.universality_samples = (
            settings.universality_samples if universality_samples is None else universality_samples
        )
        self.frames = frame_service or FrameService()

    def default_vectors(self, d: int):
        """φ = |0>, ψ = |1>"""
        if d < 2:
            raise ParameterError(f"SU(d) detector needs d ≥ 2, got {d}", d=d)
        basis = np.eye(d, dtype=np.complex128)
        return basis[0], basis[1]

    def default_ancilla(self, d: int) -> State:
        """νᵀ = |φ><φ| with φ = |0>"""
        phi, _ = self.default_vectors(d)
        return State.pure(phi.conj())

    def vectors_from_ancilla(self, ancilla: State):
        """Recover φ from a pure ancilla (νᵀ = |φ><φ|) and pick ψ orthogonal to it"""
        if abs(ancilla.purity() - 1.0) > 1e-9:
            raise AncillaError(
                f"SU(d) detector needs a pure ancilla, purity is {ancilla.purity():.6f}",
                purity=ancilla.purity(),
            )
        _, vectors = np.linalg.eigh(ancilla.matrix.T)
        phi = vectors[:, -1]
        d = phi.size
        candidates = np.eye(d, dtype=np.complex128)
        residuals = candidates - np.outer(phi, phi.conj()) @ candidates
        best = int(np.argmax(np.linalg.norm(residuals, axis=0)))
        psi = residuals[:, best] / np.linalg.norm(residuals[:, best])
        return phi, psi

    def continuous_povm(self, d: int) -> ContinuousBellPovm:
        return ContinuousBellPovm(group=ContinuousBellPovm.HAAR, dim_h=d)

    def haar_family(self, d: int, ancilla: State, seed: int = 0) -> OperatorFamily:
        """Induced members U νᵀ U† on a seeded batch of Haar samples"""
        count = self.universality_samples or 4 * d * d
        rng = np.random.default_rng(seed)
        unitaries = haar_unitaries(d, count, rng)
        members = unitaries @ ancilla.matrix.T @ np.conj(np.swapaxes(unitaries, 1, 2))
        return OperatorFamily.from_stack(members)

    def universality_report(self, d: int, ancilla: State, seed: int = 0) -> SpanningReport:
        return self.frames.spanning_report(self.haar_family(d, ancilla, seed))

    def resolution_defect(self, d: int, samples: int, seed: int = 0) -> float:
        """‖(1/N) Σ_k d|U_k>><<U_k| − I‖_F over N Haar samples"""
        rng = np.random.default_rng(seed)
        vectors = haar_unitaries(d, samples, rng).reshape(samples, -1)
        average = d * np.einsum("ni,nj->ij", vectors, vectors.conj()) / samples
        return float(np.linalg.norm(average - np.eye(d * d)))

    def check_xi_constraints(self, phi, psi) -> Dict[str, complex]:
        xi = sud_xi(phi, psi)
        phi = _unit(phi, "φ")
        return {
            "trace": xi.trace(),
            "ancilla_overlap": complex(np.trace(np.outer(phi, phi.conj()) @ xi.adjoint().entries)),
        }

    def build_detector(self, d: int, phi=None, psi=None, ancilla: Optional[State] = None) -> UniversalDetector:
        if ancilla is not None:
            if ancilla.dim != d:
                raise AncillaError(f"Ancilla dimension {ancilla.dim} differs from d={d}", ancilla=ancilla.dim, d=d)
            phi, psi = self.vectors_from_ancilla(ancilla)
        default_phi, default_psi = self.default_vectors(d)
        phi = default_phi if phi is None else _unit(phi, "φ")
        psi = default_psi if psi is None else _unit(psi, "ψ")
        ancilla = State.pure(phi.conj())

        report = self.universality_report(d, ancilla)
        if not report.spans:
            raise NotUniversalError(
                f"Haar samples span rank {report.rank} of {report.dimension}",
                rank=report.rank,
                least_singular_value=report.least_singular_value,
            )

        logger.info("Built SU(d) detector", d=d, fidelity=float(abs(np.vdot(psi, phi)) ** 2))
        return UniversalDetector(
            povm=self.continuous_povm(d),
            ancilla=ancilla,
            processing=SudXiProcessing(phi, psi),
            label=f"sud:d={d}",
            metadata={"d": d},
        )
