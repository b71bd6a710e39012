"""
Tests for the LOCC detector
"""
import numpy as np
import pytest

from app.exceptions import NormalityError, ParameterError, SpanningError, VanishingDenominatorError
from app.models.frame import OperatorFamily
from app.models.operator import Operator, State
from app.services.locc_service import LoccService, locc_povm, locc_povm_from_family
from app.services.operator_algebra import random_density, random_operator


@pytest.fixture
def locc_service():
    """Create LOCC service instance"""
    return LoccService()


def matrix_units(d: int) -> OperatorFamily:
    units = np.zeros((d * d, d, d), dtype=complex)
    for i in range(d):
        for j in range(d):
            units[i * d + j, i, j] = 1.0
    return OperatorFamily.from_stack(units)


class TestLoccPovm:
    """Test cases for the LOCC POVM construction"""

    @pytest.mark.parametrize("d", [2, 3])
    def test_povm_is_valid(self, povm_service, d):
        """Test Σ_{k,l} |c_k(l)><c_k(l)| ⊗ |l><l| = I"""
        locc = locc_povm(d)
        report = povm_service.validate_povm(locc.povm)

        assert report.passed is True
        assert len(locc.povm) == d * d * d
        assert locc.povm.dims == (d, d * d)

    def test_element_order_and_labels(self):
        """Test element l·d + k carries label (k,l)"""
        locc = locc_povm(2)
        index = locc.element_index(k=1, l=3)

        assert index == 7
        assert locc.povm.labels[index] == "(1,3)"

    def test_elements_are_product_projectors(self):
        """Test each element is |c_k(l)><c_k(l)| ⊗ |l><l|"""
        locc = locc_povm(2)
        vector = locc.eigenvectors[2][:, 1]
        ancilla = np.zeros((4, 4))
        ancilla[2, 2] = 1.0

        expected = np.kron(np.outer(vector, vector.conj()), ancilla)
        np.testing.assert_allclose(locc.povm.elements[locc.element_index(1, 2)].entries, expected, atol=1e-12)

    def test_eigen_decomposition_of_base(self):
        """Test C(l) = Σ_k c_k(l)|c_k(l)><c_k(l)|"""
        locc = locc_povm(3)
        for l, member in enumerate(locc.base.members):
            vectors = locc.eigenvectors[l]
            rebuilt = vectors @ np.diag(locc.eigenvalues[l]) @ vectors.conj().T
            np.testing.assert_allclose(rebuilt, member.entries, atol=1e-10)

    def test_non_normal_base_rejected(self):
        """Test matrix units span but E_01 is not normal"""
        with pytest.raises(NormalityError):
            locc_povm_from_family(matrix_units(2))

    def test_non_spanning_base_rejected(self):
        """Test four copies of the identity do not span M_2"""
        base = OperatorFamily.from_stack(np.stack([np.eye(2)] * 4))
        with pytest.raises(SpanningError):
            locc_povm_from_family(base)

    def test_too_few_base_operators(self):
        """Test L < d² is rejected before the spanning test"""
        base = OperatorFamily.from_stack(np.stack([np.eye(2)] * 3))
        with pytest.raises(ParameterError):
            locc_povm_from_family(base)

    def test_hermitian_base_family(self, povm_service):
        """Test an overcomplete Hermitian base family also yields a POVM"""
        members = np.stack([random_operator(2, seed=s, hermitian=True).entries for s in range(6)])
        locc = locc_povm_from_family(OperatorFamily.from_stack(members))

        assert povm_service.validate_povm(locc.povm).passed
        assert locc.size == 6


class TestLoccProcessing:
    """Test cases for the LOCC processing rule"""

    @pytest.mark.parametrize("d", [2, 3])
    @pytest.mark.parametrize("ancilla_kind", ["uniform", "diagonal"])
    def test_identity_for_random_operators(self, locc_service, povm_service, trace_expectation, d, ancilla_kind):
        """Test Σ_{k,l} f_{k,l} p_{k,l} = Tr[ρO] on 100 random ρ and complex O"""
        if ancilla_kind == "uniform":
            ancilla = State.maximally_mixed(d * d)
        else:
            populations = np.random.default_rng(d).uniform(0.2, 1.0, d * d)
            ancilla = State(Operator(np.diag(populations / populations.sum())))
        detector = locc_service.build_detector(d, ancilla=ancilla)

        errors = []
        for seed in range(100):
            state = random_density(d, d, seed=300 * d + seed)
            observable = random_operator(d, seed=700 * d + seed)
            value = povm_service.exact_expectation(detector, state, observable)
            errors.append(abs(value - trace_expectation(state, observable)))

        assert max(errors) < 1e-9

    def test_non_uniform_ancilla(self, locc_service, povm_service, qubit_state, complex_observable, trace_expectation):
        """Test the identity holds for any ancilla with positive populations"""
        ancilla = random_density(4, 4, seed=17)
        detector = locc_service.build_detector(2, ancilla=ancilla)
        observable = complex_observable(2)

        value = povm_service.exact_expectation(detector, qubit_state, observable)
        assert value == pytest.approx(trace_expectation(qubit_state, observable), abs=1e-9)

    def test_weight_formula(self, locc_service):
        """Test f_{k,l} = Tr[Θ(l)†O] c_k(l) / <l|ν|l> for O = C(2)"""
        locc = locc_povm(2)
        ancilla = State.maximally_mixed(4)
        observable = locc.base.members[2]

        f = locc_service.locc_processing(locc, ancilla, observable)
        # Θ(l) = C(l)/2 for the Weyl basis, so Tr[Θ(l)†C(2)] = δ_{l2}
        expected = np.zeros((4, 2), dtype=complex)
        expected[2] = 4 * locc.eigenvalues[2]
        np.testing.assert_allclose(f, expected.reshape(-1), atol=1e-10)

    def test_vanishing_population(self, locc_service):
        """Test <l|ν|l> = 0 is rejected and names l"""
        ancilla = State(Operator(np.diag([0.5, 0.5, 0.0, 0.0])))
        with pytest.raises(VanishingDenominatorError) as exc_info:
            locc_service.build_detector(2, ancilla=ancilla)

        assert exc_info.value.context["l"] == 2

    def test_default_ancilla(self, locc_service):
        """Test the default ancilla is I/d²"""
        ancilla = locc_service.default_ancilla(3)
        np.testing.assert_allclose(ancilla.matrix, np.eye(9) / 9, atol=1e-15)
