"""
Tests for the SU(2) Bell detector on spin-j representations
"""
from fractions import Fraction

import numpy as np
import pytest

from app.exceptions import AncillaError, ParameterError
from app.models.groups import SpinSystem
from app.models.operator import Operator, State
from app.services.operator_algebra import random_density, random_operator
from app.services.su2_service import (
    SWAPPED_MEASURE, Su2Service, spin_coherent, spin_coherent_batch, spin_coherent_completeness,
    su2_bell_element, su2_compose, su2_factorize, su2_grid, su2_resolution, su2_unitaries, su2_unitary
)

SMALL_GRID = (8, 6, 6)


@pytest.fixture
def su2_service():
    """SU(2) service on a grid that is exact up to j = 1"""
    return Su2Service(grid_shape=SMALL_GRID)


class TestSpinSystem:
    """Test cases for angular momentum operators"""

    @pytest.mark.parametrize("j", ["1/2", "1", "3/2", 2])
    def test_commutation_and_casimir(self, j):
        """Test [Jx, Jy] = iJz and J² = j(j+1)I"""
        sys = SpinSystem.of(j)
        jx, jy, jz = sys.jx.entries, sys.jy.entries, sys.jz.entries
        casimir = jx @ jx + jy @ jy + jz @ jz
        value = float(sys.j) * (float(sys.j) + 1)

        np.testing.assert_allclose(jx @ jy - jy @ jx, 1j * jz, atol=1e-12)
        np.testing.assert_allclose(casimir, value * np.eye(sys.dim), atol=1e-12)

    @pytest.mark.parametrize("j", ["0", "1/3", "-1", "x"])
    def test_invalid_spin(self, j):
        """Test spins must be positive half-integers"""
        with pytest.raises(ParameterError):
            SpinSystem.of(j)

    def test_m_index(self):
        """Test |m> rows run from m = j down to −j"""
        sys = SpinSystem.of("3/2")
        assert sys.m_index("3/2") == 0
        assert sys.m_index("-1/2") == 2
        with pytest.raises(ParameterError):
            sys.m_index("1")


class TestCoherentStates:
    """Test cases for spin coherent states"""

    @pytest.mark.parametrize("m", ["1", "0", "-1"])
    def test_batch_matches_exponential(self, m):
        """Test the diagonalised rotation agrees with the matrix exponential"""
        sys = SpinSystem.of(1)
        psi = np.array([0.3, 1.7, 2.9])
        phi = np.array([0.1, 4.0, 5.5])

        batch = spin_coherent_batch(sys, psi, phi, m)
        for row, (a, b) in enumerate(zip(psi, phi)):
            np.testing.assert_allclose(batch[row], spin_coherent(sys, a, b, m), atol=1e-12)

    def test_spin_half_rotation_by_pi(self):
        """Test ψ = π, φ = 0 sends |1/2> to a phase times |−1/2>"""
        sys = SpinSystem.of("1/2")
        vector = spin_coherent(sys, np.pi, 0.0, "1/2")

        assert abs(vector[sys.m_index("-1/2")]) == pytest.approx(1.0, abs=1e-12)
        assert abs(vector[sys.m_index("1/2")]) < 1e-12

    @pytest.mark.parametrize("j", ["1/2", "1", "3/2"])
    def test_completeness_haar_measure(self, j):
        """Test (2j+1)/(4π)∫|ψ,φ;j><ψ,φ;j| dΩ = I"""
        sys = SpinSystem.of(j)
        total = spin_coherent_completeness(sys, j, n_polar=24, n_azimuth=24)
        np.testing.assert_allclose(total.entries, np.eye(sys.dim), atol=1e-10)

    def test_completeness_swapped_measure_spin_half(self):
        """Test the swapped-angle ordering still resolves I for j = 1/2"""
        sys = SpinSystem.of("1/2")
        total = spin_coherent_completeness(sys, "1/2", n_polar=24, n_azimuth=24, measure=SWAPPED_MEASURE)
        np.testing.assert_allclose(total.entries, np.eye(2), atol=1e-10)

    def test_completeness_swapped_measure_spin_one(self):
        """Test the swapped-angle ordering is anisotropic for j = 1"""
        sys = SpinSystem.of(1)
        total = spin_coherent_completeness(sys, 1, n_polar=24, n_azimuth=24, measure=SWAPPED_MEASURE)
        assert np.linalg.norm(total.entries - np.eye(3)) > 1e-2

    def test_unknown_measure(self):
        """Test the measure name is checked"""
        with pytest.raises(ParameterError):
            spin_coherent_completeness(SpinSystem.of(1), 1, measure="flat")


class TestGroupElements:
    """Test cases for U(ψ, n) and its factorisation"""

    @pytest.mark.parametrize("j", ["1/2", "1", "3/2"])
    def test_batched_unitaries_match_exponential(self, j):
        """Test R e^{iψJz} R† = exp(iψ n·J)"""
        sys = SpinSystem.of(j)
        psi = np.array([0.4, 2.2, 5.9])
        theta = np.array([0.3, 1.2, 2.8])
        phi = np.array([0.0, 2.5, 4.4])

        batch = su2_unitaries(sys, psi, theta, phi)
        for k in range(3):
            axis = [np.sin(theta[k]) * np.cos(phi[k]), np.sin(theta[k]) * np.sin(phi[k]), np.cos(theta[k])]
            np.testing.assert_allclose(batch[k], su2_unitary(sys, psi[k], axis).entries, atol=1e-10)

    def test_non_unit_axis(self):
        """Test the rotation axis must be normalised"""
        with pytest.raises(ParameterError):
            su2_unitary(SpinSystem.of(1), 0.5, [1.0, 1.0, 0.0])

    @pytest.mark.parametrize("j", ["1/2", "1", "2"])
    @pytest.mark.parametrize(
        "psi,axis",
        [
            (0.7, [0.0, 0.0, 1.0]),
            (1.9, [0.6, 0.0, 0.8]),
            (4.1, [0.36, 0.48, 0.8]),
            (3.0, [1.0, 0.0, 0.0]),
        ],
    )
    def test_factorisation_round_trip(self, j, psi, axis):
        """Test D(ψ',φ') e^{2iθ'Jz} reproduces exp(iψ n·J)"""
        sys = SpinSystem.of(j)
        psi_prime, phi_prime, theta_prime = su2_factorize(sys, psi, axis)

        assert 0.0 <= psi_prime <= np.pi
        rebuilt = su2_compose(sys, psi_prime, phi_prime, theta_prime)
        assert rebuilt.allclose(su2_unitary(sys, psi, axis), atol=1e-10)

    @pytest.mark.parametrize("j", ["1/2", "1", "3/2"])
    def test_factorisation_random_parameters(self, j):
        """Test the factorisation residual on 100 random (ψ, n)"""
        sys = SpinSystem.of(j)
        rng = np.random.default_rng(17)
        for _ in range(100):
            psi = rng.uniform(0.0, 2 * np.pi)
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)

            rebuilt = su2_compose(sys, *su2_factorize(sys, psi, axis))
            residual = np.linalg.norm(rebuilt.entries - su2_unitary(sys, psi, axis).entries)
            assert residual < 1e-8

    @pytest.mark.parametrize("j", ["1/2", "1", "3/2"])
    def test_bell_element_at_identity(self, j):
        """Test ψ = 0 gives |I>><<I| with trace 2j+1"""
        sys = SpinSystem.of(j)
        element = su2_bell_element(sys, 0.0, [0.0, 0.0, 1.0])
        identity = np.eye(sys.dim).reshape(-1)

        np.testing.assert_allclose(element.entries, np.outer(identity, identity), atol=1e-12)
        assert element.trace() == pytest.approx(sys.dim)
        assert element.factors == (sys.dim, sys.dim)


class TestQuadrature:
    """Test cases for the SU(2) quadrature grid"""

    def test_weights_normalised(self):
        """Test the weights form a probability vector"""
        grid = su2_grid(*SMALL_GRID)

        assert grid.size == 8 * 6 * 6
        assert grid.weights.sum() == pytest.approx(1.0)
        assert np.all(grid.weights > 0)

    @pytest.mark.parametrize("j", ["1/2", "1"])
    def test_resolution_of_identity(self, j):
        """Test Σ_x (2j+1)μ_x |U_x>><<U_x| = I⊗I"""
        sys = SpinSystem.of(j)
        total = su2_resolution(sys, su2_grid(*SMALL_GRID))
        np.testing.assert_allclose(total.entries, np.eye(sys.dim**2), atol=1e-10)

    def test_coarse_grid_misses_identity(self):
        """Test a grid below the needed degree does not resolve I for j = 1"""
        sys = SpinSystem.of(1)
        total = su2_resolution(sys, su2_grid(2, 1, 1))
        assert np.linalg.norm(total.entries - np.eye(9)) > 1e-3

    def test_invalid_grid(self):
        """Test grid sizes must be positive"""
        with pytest.raises(ParameterError):
            su2_grid(0, 4, 4)


class TestSu2Service:
    """Test cases for Su2Service"""

    def test_default_ancilla_populations(self, su2_service):
        """Test p_m ∝ 2^{−(j−m)}"""
        ancilla = su2_service.default_ancilla(SpinSystem.of(1))
        np.testing.assert_allclose(np.diag(ancilla.matrix).real, np.array([4, 2, 1]) / 7, atol=1e-12)

    @pytest.mark.parametrize("j", ["1/2", "1"])
    def test_identity_for_random_operators(self, su2_service, povm_service, j):
        """Test Σ_x f(x) p(x) = Tr[ρO]"""
        detector = su2_service.build_detector(j)
        dim = SpinSystem.of(j).dim
        for seed in range(3):
            state = random_density(dim, dim, seed=seed)
            observable = random_operator(dim, seed=50 + seed)
            value = povm_service.exact_expectation(detector, state, observable)
            assert value == pytest.approx(complex(np.trace(state.matrix @ observable.entries)), abs=1e-9)

    def test_grid_family_sums_to_identity(self, su2_service):
        """Test Σ_x Ξ_x = I on an exact grid"""
        sys = SpinSystem.of(1)
        family = su2_service.grid_family(sys, su2_service.default_ancilla(sys), su2_service.grid())
        np.testing.assert_allclose(family.stack().sum(axis=0), np.eye(3), atol=1e-10)

    def test_non_diagonal_ancilla_rejected(self, su2_service):
        """Test the ancilla must be diagonal in the J_z basis"""
        ancilla = State.pure(np.array([1.0, 1.0]) / np.sqrt(2))
        with pytest.raises(AncillaError):
            su2_service.build_detector("1/2", ancilla=ancilla)

    def test_vanishing_population_rejected(self, su2_service):
        """Test every p_m must be positive"""
        ancilla = State(Operator(np.diag([1.0, 0.0, 0.0])))
        with pytest.raises(AncillaError):
            su2_service.build_detector(1, ancilla=ancilla)

    def test_numeric_processing_expands_observable(self, su2_service):
        """Test Σ_x f(x) Ξ_x = O"""
        sys = SpinSystem.of(Fraction(1, 2))
        ancilla = su2_service.default_ancilla(sys)
        grid = su2_service.grid()
        observable = random_operator(2, seed=21)

        f = su2_service.su2_numeric_processing(sys, ancilla, grid, observable)
        family = su2_service.grid_family(sys, ancilla, grid)
        np.testing.assert_allclose(np.tensordot(f, family.stack(), axes=1), observable.entries, atol=1e-9)

    def test_numeric_processing_default_grid(self):
        """Test Σ_x f(x) p(x) = Tr[ρJ_z] for ν = diag(0.7, 0.3) on the default grid"""
        service = Su2Service()
        sys = SpinSystem.of("1/2")
        ancilla = State(Operator(np.diag([0.7, 0.3]).astype(complex)))
        grid = service.grid()
        state = random_density(2, 2, seed=61)

        f = service.su2_numeric_processing(sys, ancilla, grid, sys.jz)
        family = service.grid_family(sys, ancilla, grid)
        probabilities = np.einsum("ij,nji->n", state.matrix, family.stack())

        assert grid.shape == (40, 20, 20)
        assert probabilities.sum() == pytest.approx(1.0, abs=1e-9)
        assert abs(np.sum(f * probabilities) - np.trace(state.matrix @ sys.jz.entries)) < 1e-3

    def test_detector_metadata(self, su2_service):
        """Test label and processing parameters"""
        detector = su2_service.build_detector("3/2")

        assert detector.label == "su2:j=3/2"
        assert detector.dim_h == 4
        assert detector.processing.params()["grid"] == list(SMALL_GRID)
