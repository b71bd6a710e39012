"""
Domain errors raised by the detector services.

Every error carries a human readable ``detail`` plus structured ``context``
and the process exit code the CLI maps it to.
"""
from typing import Any, Dict


class DetectorError(Exception):
    """Base class for all library errors"""

    exit_code: int = 1

    def __init__(self, detail: str, **context: Any):
        super().__init__(detail)
        self.detail = detail
        self.context: Dict[str, Any] = context

    def __str__(self) -> str:
        return self.detail


class DimensionError(DetectorError):
    """Shapes or subsystem factorisations do not agree"""


class HermiticityError(DetectorError):
    """Operator is not Hermitian within tolerance"""


class NormalityError(DetectorError):
    """Operator does not commute with its adjoint"""


class PositivityError(DetectorError):
    """Operator has eigenvalues below -tolerance"""


class InvalidStateError(DetectorError):
    """Operator fails the density-matrix invariants"""


class ParameterError(DetectorError):
    """Argument outside its admissible range"""


class SpanningError(DetectorError):
    """Operator family does not span the operator space"""


class NotUniversalError(DetectorError):
    """Induced family of a POVM/ancilla pair is not spanning"""


class VanishingDenominatorError(NotUniversalError):
    """A processing denominator is below the configured guard"""


class AncillaError(NotUniversalError):
    """No admissible ancilla state could be produced or the one given is unusable"""


class ConfigError(DetectorError):
    """Experiment configuration could not be parsed"""

    exit_code = 2


class SamplingError(DetectorError):
    """Rejection sampling exhausted its round budget"""
