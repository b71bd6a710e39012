"""
Pytest configuration and fixtures for testing
"""
import numpy as np
import pytest

from app.models.operator import Operator, State
from app.services.operator_algebra import random_density, random_operator
from app.services.povm_service import PovmService
from app.services.weyl_service import WeylService


@pytest.fixture
def povm_service():
    """Create POVM service instance"""
    return PovmService()


@pytest.fixture
def weyl_service():
    """Create Weyl service instance"""
    return WeylService()


@pytest.fixture
def qubit_state() -> State:
    """Full-rank qubit state, fixed seed"""
    return random_density(2, 2, seed=11)


@pytest.fixture
def qutrit_state() -> State:
    """Full-rank qutrit state, fixed seed"""
    return random_density(3, 3, seed=12)


@pytest.fixture
def complex_observable():
    """Factory for non-Hermitian test observables"""

    def make(dim: int, seed: int = 5) -> Operator:
        return random_operator(dim, seed=seed)

    return make


@pytest.fixture
def trace_expectation():
    """Tr[ρO] computed directly"""

    def evaluate(state: State, observable: Operator) -> complex:
        return complex(np.trace(state.matrix @ observable.entries))

    return evaluate
