"""
Tests for the Weyl-Heisenberg Bell detector
"""
import numpy as np
import pytest

from app.exceptions import AncillaError, ParameterError, VanishingDenominatorError
from app.models.groups import WeylGroup
from app.models.operator import Operator, State
from app.services.operator_algebra import random_density, random_operator
from app.services.weyl_service import (
    WeylClosedFormProcessing, WeylService, cocycle_sum, weyl_bell_povm, weyl_stack, weyl_traces, weyl_unitary
)


class TestWeylUnitaries:
    """Test cases for U_{m,n} and the cocycle"""

    def test_unitary_entries(self):
        """Test U_{m,n} = Σ_k e^{2πikm/d}|k><k⊕n|"""
        u = weyl_unitary(3, 1, 2).entries
        omega = np.exp(2j * np.pi / 3)

        assert u[0, 2] == pytest.approx(1.0)
        assert u[1, 0] == pytest.approx(omega)
        assert u[2, 1] == pytest.approx(omega**2)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(3), atol=1e-12)

    @pytest.mark.parametrize("alpha,beta", [((1, 0), (0, 1)), ((1, 2), (2, 1)), ((2, 2), (1, 0))])
    def test_commutation_phase_is_cocycle(self, alpha, beta):
        """Test U_α U_β = e^{ic(α,β)} U_β U_α"""
        d = 3
        u_a, u_b = weyl_unitary(d, *alpha).entries, weyl_unitary(d, *beta).entries
        phase = np.exp(1j * WeylGroup(d).cocycle(alpha, beta))

        np.testing.assert_allclose(u_a @ u_b, phase * u_b @ u_a, atol=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
    def test_conjugation_phase_is_cocycle(self, d):
        """Test U_α U_β U†_α = e^{ic(α,β)} U_β for every α, β"""
        group = WeylGroup(d)
        stack = weyl_stack(d)
        conjugated = np.einsum("aij,bjk,alk->abil", stack, stack, stack.conj())
        phases = np.array([[np.exp(1j * group.cocycle(a, b)) for b in group.pairs()] for a in group.pairs()])

        np.testing.assert_allclose(conjugated, phases[:, :, None, None] * stack[None], atol=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
    def test_trace_orthogonality_all_pairs(self, d):
        """Test Tr[U†_{p,q} U_{m,n}] = d·δ_{mp}δ_{nq} for every pair"""
        stack = weyl_stack(d)
        gram = np.einsum("aij,bij->ab", stack.conj(), stack)

        np.testing.assert_allclose(gram, d * np.eye(d * d), atol=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_cocycle_sum_orthogonality(self, d):
        """Test Σ_α e^{ic(α,γ)} e^{ic(β,α)} = d²δ_{γβ} for every γ, β"""
        pairs = list(WeylGroup(d).pairs())
        sums = np.array([[cocycle_sum(d, gamma, beta) for beta in pairs] for gamma in pairs])

        np.testing.assert_allclose(sums, d * d * np.eye(d * d), atol=1e-10)

    def test_hilbert_schmidt_orthogonality(self):
        """Test Tr[U†_α U_β] = d·δ_{αβ}"""
        gram = weyl_traces(3, weyl_unitary(3, 2, 1))
        expected = np.zeros((3, 3))
        expected[2, 1] = 3.0
        np.testing.assert_allclose(gram, expected, atol=1e-12)

    def test_indices_out_of_range(self):
        """Test (m, n) must lie in Z_d × Z_d"""
        with pytest.raises(ParameterError):
            weyl_unitary(3, 3, 0)


class TestWeylBellPovm:
    """Test cases for the Bell projectors"""

    def test_orthogonal_projectors(self):
        """Test Π_α Π_β = δ_{αβ} Π_α"""
        stack = weyl_bell_povm(3).stack()
        products = np.einsum("aij,bjk->abik", stack, stack)

        for a in range(9):
            for b in range(9):
                expected = stack[a] if a == b else np.zeros_like(stack[a])
                np.testing.assert_allclose(products[a, b], expected, atol=1e-12)

    def test_labels_follow_index_order(self):
        """Test outcome m·d + n carries label (m,n)"""
        povm = weyl_bell_povm(3)
        assert povm.labels[WeylGroup(3).index(2, 1)] == "(2,1)"


class TestWeylAncilla:
    """Test cases for ancilla selection"""

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_selected_ancilla_has_nonvanishing_denominators(self, weyl_service, d):
        """Test every |Tr[U†νᵀ]| clears the guard"""
        ancilla = weyl_service.weyl_ancilla(d)

        assert ancilla.dim == d
        assert weyl_service.min_denominator(d, ancilla) > weyl_service.denominator_guard

    def test_exhausted_candidates(self):
        """Test an impossible guard exhausts the chain"""
        service = WeylService(denominator_guard=10.0, ancilla_search_attempts=2)
        with pytest.raises(AncillaError):
            service.weyl_ancilla(2)

    def test_explicit_zero_guard_is_kept(self, weyl_service):
        """Test a guard of 0 is used as given rather than replaced by the default"""
        ancilla = weyl_service.weyl_ancilla(2)

        assert WeylService(denominator_guard=0.0, ancilla_search_attempts=0).denominator_guard == 0.0
        assert WeylService(ancilla_search_attempts=0).ancilla_search_attempts == 0
        assert WeylClosedFormProcessing(2, ancilla, denominator_guard=0.0).denominator_guard == 0.0


class TestWeylProcessing:
    """Test cases for the closed-form processing"""

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_identity_for_random_operators(self, povm_service, weyl_service, trace_expectation, d):
        """Test Σ f_{m,n} p_{m,n} = Tr[ρO] on 100 random full-rank ρ and complex O"""
        detector = weyl_service.build_detector(d)
        errors = []
        for seed in range(100):
            state = random_density(d, d, seed=1000 * d + seed)
            observable = random_operator(d, seed=5000 * d + seed)
            value = povm_service.exact_expectation(detector, state, observable)
            errors.append(abs(value - trace_expectation(state, observable)))

        assert max(errors) < 1e-8

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_closed_form_matches_generic_dual(self, povm_service, weyl_service, d):
        """Test the closed-form f agrees with canonical-dual coefficients componentwise"""
        ancilla = weyl_service.weyl_ancilla(d)
        generic = povm_service.build_detector(weyl_bell_povm(d), ancilla)
        closed = WeylClosedFormProcessing(d, ancilla)

        for seed in range(10):
            observable = random_operator(d, seed=200 + seed, hermitian=seed % 2 == 0)
            np.testing.assert_allclose(
                closed.coefficients(observable),
                povm_service.processing_coefficients(generic, observable),
                atol=1e-8,
            )

    def test_coefficients_expand_observable(self, povm_service, weyl_service):
        """Test Σ_i f_i Ξ_i = O"""
        ancilla = weyl_service.weyl_ancilla(3)
        family = povm_service.induced_family(weyl_bell_povm(3), ancilla)
        observable = random_operator(3, seed=4)

        f = weyl_service.weyl_processing(3, ancilla, observable)
        np.testing.assert_allclose(np.tensordot(f, family.stack(), axes=1), observable.entries, atol=1e-9)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_identity_observable_gives_unit_weights(self, weyl_service, d):
        """Test f ≡ 1 exactly for O = I"""
        f = weyl_service.weyl_processing(d, weyl_service.weyl_ancilla(d), Operator.identity(d))
        assert np.all(f == 1.0)

    @pytest.mark.parametrize("d", [3, 5, 7])
    def test_traces_of_identity_are_exact(self, d):
        """Test Tr[U†_{p,q}] is exactly zero away from (0, 0)"""
        traces = weyl_traces(d, Operator.identity(d))
        expected = np.zeros((d, d), dtype=complex)
        expected[0, 0] = d

        np.testing.assert_array_equal(traces, expected)

    def test_vanishing_denominator_names_pair(self):
        """Test I/d is rejected at the first vanishing (p, q)"""
        with pytest.raises(VanishingDenominatorError) as exc_info:
            WeylClosedFormProcessing(2, State.maximally_mixed(2))

        assert (exc_info.value.context["p"], exc_info.value.context["q"]) == (0, 1)

    def test_detector_metadata(self, weyl_service):
        """Test label and processing kind"""
        detector = weyl_service.build_detector(2)

        assert detector.label == "weyl:d=2"
        assert detector.processing.kind == "weyl-closed-form"
        assert detector.is_discrete
