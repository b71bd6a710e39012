"""
Domain models for the Universal Detector Lab
"""
from .operator import BipartiteVector, Operator, State
from .frame import DualFamily, FrameMap, OperatorFamily, SpanningReport
from .groups import LoccPovm, QuadratureGrid, SpinSystem, WeylGroup
from .povm import (
    ContinuousBellPovm, DiagonalizedElement, DiscreteProcessingRule,
    Povm, PovmValidation, ProcessingRule, UniversalDetector
)
from .distribution import ContinuousOutcomeDistribution, DiscreteOutcomeDistribution, SampleBatch

__all__ = [
    "Operator",
    "BipartiteVector",
    "State",
    "OperatorFamily",
    "DualFamily",
    "FrameMap",
    "SpanningReport",
    "WeylGroup",
    "SpinSystem",
    "QuadratureGrid",
    "LoccPovm",
    "Povm",
    "PovmValidation",
    "DiagonalizedElement",
    "ContinuousBellPovm",
    "ProcessingRule",
    "DiscreteProcessingRule",
    "UniversalDetector",
    "DiscreteOutcomeDistribution",
    "ContinuousOutcomeDistribution",
    "SampleBatch",
]
