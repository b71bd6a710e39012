"""
Detector registry: string identifiers such as "weyl:d=3", "sud:d=2",
"su2:j=1/2" and "locc:d=2" mapped to detector providers
"""
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import structlog

from app.config import settings
from app.exceptions import ConfigError, NotUniversalError, ParameterError
from app.models.frame import SpanningReport
from app.models.groups import SpinSystem, parse_spin
from app.models.operator import State
from app.models.povm import PovmValidation, UniversalDetector
from app.services.frame_service import FrameService
from app.services.locc_service import LoccService, locc_povm
from app.services.povm_service import PovmService
from app.services.su2_service import Su2Service, su2_resolution
from app.services.sud_service import SudService
from app.services.weyl_service import WeylService, weyl_bell_povm

logger = structlog.get_logger(__name__)

DETECTOR_ID = re.compile(r"^(?P<family>[a-z0-9]+):(?P<key>[a-z]+)=(?P<value>[0-9./]+)$")


@dataclass(frozen=True)
class DetectorSpec:
    """Parsed detector identifier"""

    family: str
    params: Dict[str, str] = field(default_factory=dict)

    @property
    def identifier(self) -> str:
        return f"{self.family}:" + ",".join(f"{k}={v}" for k, v in self.params.items())


def parse_detector_id(text: str) -> DetectorSpec:
    match = DETECTOR_ID.match(text.strip().lower())
    if not match:
        raise ConfigError(
            f"Malformed detector id '{text}'; expected e.g. 'weyl:d=3', 'sud:d=2', 'su2:j=1/2' or 'locc:d=2'",
            field="detector",
            value=text,
        )
    return DetectorSpec(family=match.group("family"), params={match.group("key"): match.group("value")})


class DetectorProvider(ABC):
    """Abstract base class for detector constructors"""

    family: str = "abstract"
    parameter: str = "d"

    def __init__(self, povm_service: PovmService):
        self.povms = povm_service

    def _dimension_param(self, spec: DetectorSpec) -> int:
        raw = spec.params.get(self.parameter)
        if raw is None or not raw.isdigit() or int(raw) < 2:
            raise ConfigError(
                f"Detector '{spec.identifier}' needs an integer {self.parameter} ≥ 2",
                field="detector",
                value=spec.identifier,
            )
        return int(raw)

    @abstractmethod
    def system_dimension(self, spec: DetectorSpec) -> int:
        """dim H of the detector"""

    @abstractmethod
    def ancilla_dimension(self, spec: DetectorSpec) -> int:
        """dim K of the detector"""

    @abstractmethod
    def default_ancilla(self, spec: DetectorSpec) -> State:
        """Ancilla used when the config says "auto" """

    @abstractmethod
    def validate_povm(self, spec: DetectorSpec) -> PovmValidation:
        """Positivity and completeness of the underlying POVM"""

    @abstractmethod
    def universality(self, spec: DetectorSpec, ancilla: State) -> SpanningReport:
        """Rank of the induced family for this ancilla"""

    @abstractmethod
    def build(self, spec: DetectorSpec, ancilla: State) -> UniversalDetector:
        """Detector with processing; only called for a universal ancilla"""


class WeylProvider(DetectorProvider):
    family = "weyl"

    def __init__(self, povm_service: PovmService):
        super().__init__(povm_service)
        self.service = WeylService()

    def system_dimension(self, spec: DetectorSpec) -> int:
        return self._dimension_param(spec)

    def ancilla_dimension(self, spec: DetectorSpec) -> int:
        return self._dimension_param(spec)

    def default_ancilla(self, spec: DetectorSpec) -> State:
        return self.service.weyl_ancilla(self._dimension_param(spec))

    def validate_povm(self, spec: DetectorSpec) -> PovmValidation:
        return self.povms.validate_povm(weyl_bell_povm(self._dimension_param(spec)))

    def universality(self, spec: DetectorSpec, ancilla: State) -> SpanningReport:
        return self.povms.universality_report(weyl_bell_povm(self._dimension_param(spec)), ancilla)

    def build(self, spec: DetectorSpec, ancilla: State) -> UniversalDetector:
        return self.service.build_detector(self._dimension_param(spec), ancilla)


class SudProvider(DetectorProvider):
    family = "sud"
    resolution_samples = 4096

    def __init__(self, povm_service: PovmService):
        super().__init__(povm_service)
        self.service = SudService()

    def system_dimension(self, spec: DetectorSpec) -> int:
        return self._dimension_param(spec)

    def ancilla_dimension(self, spec: DetectorSpec) -> int:
        return self._dimension_param(spec)

    def default_ancilla(self, spec: DetectorSpec) -> State:
        return self.service.default_ancilla(self._dimension_param(spec))

    def validate_povm(self, spec: DetectorSpec) -> PovmValidation:
        # Monte Carlo resolution of identity; the tolerance is four times the
        # expected Frobenius fluctuation sqrt((d⁴ − d²)/N)
        d = self._dimension_param(spec)
        samples = self.resolution_samples
        defect = self.service.resolution_defect(d, samples)
        tolerance = 4.0 * np.sqrt((d ** 4 - d ** 2) / samples)
        return PovmValidation(
            passed=defect <= tolerance,
            max_negative_eigenvalue=0.0,
            completeness_defect=defect,
            trace_defect=0.0,
            tolerance=float(tolerance),
            outcomes=samples,
        )

    def universality(self, spec: DetectorSpec, ancilla: State) -> SpanningReport:
        return self.service.universality_report(self._dimension_param(spec), ancilla)

    def build(self, spec: DetectorSpec, ancilla: State) -> UniversalDetector:
        return self.service.build_detector(self._dimension_param(spec), ancilla=ancilla)


class Su2Provider(DetectorProvider):
    family = "su2"
    parameter = "j"

    def __init__(self, povm_service: PovmService, grid_shape: Optional[Tuple[int, int, int]] = None):
        super().__init__(povm_service)
        self.service = Su2Service(grid_shape=grid_shape)

    def _spin(self, spec: DetectorSpec) -> SpinSystem:
        raw = spec.params.get("j")
        try:
            return SpinSystem.of(parse_spin(raw))
        except ParameterError as exc:
            raise ConfigError(
                f"Detector '{spec.identifier}' needs a positive half-integer j",
                field="detector",
                value=spec.identifier,
            ) from exc

    def system_dimension(self, spec: DetectorSpec) -> int:
        return self._spin(spec).dim

    def ancilla_dimension(self, spec: DetectorSpec) -> int:
        return self._spin(spec).dim

    def default_ancilla(self, spec: DetectorSpec) -> State:
        return self.service.default_ancilla(self._spin(spec))

    def validate_povm(self, spec: DetectorSpec) -> PovmValidation:
        sys = self._spin(spec)
        grid = self.service.grid()
        total = su2_resolution(sys, grid).entries
        dim = sys.dim * sys.dim
        defect = float(np.linalg.norm(total - np.eye(dim)))
        tolerance = self.povms.tolerance
        return PovmValidation(
            passed=defect <= tolerance,
            max_negative_eigenvalue=0.0,
            completeness_defect=defect,
            trace_defect=float(abs(np.trace(total) - dim)),
            tolerance=tolerance,
            outcomes=grid.size,
        )

    def universality(self, spec: DetectorSpec, ancilla: State) -> SpanningReport:
        sys = self._spin(spec)
        family = self.service.grid_family(sys, ancilla, self.service.grid())
        return self.service.frames.spanning_report(family)

    def build(self, spec: DetectorSpec, ancilla: State) -> UniversalDetector:
        return self.service.build_detector(self._spin(spec).j, ancilla=ancilla)


class LoccProvider(DetectorProvider):
    family = "locc"

    def __init__(self, povm_service: PovmService):
        super().__init__(povm_service)
        self.service = LoccService()

    def system_dimension(self, spec: DetectorSpec) -> int:
        return self._dimension_param(spec)

    def ancilla_dimension(self, spec: DetectorSpec) -> int:
        d = self._dimension_param(spec)
        return d * d

    def default_ancilla(self, spec: DetectorSpec) -> State:
        return self.service.default_ancilla(self._dimension_param(spec))

    def validate_povm(self, spec: DetectorSpec) -> PovmValidation:
        return self.povms.validate_povm(locc_povm(self._dimension_param(spec)).povm)

    def universality(self, spec: DetectorSpec, ancilla: State) -> SpanningReport:
        return self.povms.universality_report(locc_povm(self._dimension_param(spec)).povm, ancilla)

    def build(self, spec: DetectorSpec, ancilla: State) -> UniversalDetector:
        return self.service.build_detector(self._dimension_param(spec), ancilla)


class DetectorRegistry:
    """
    Resolves detector identifiers to providers and assembles detectors
    """

    def __init__(self, grid_shape: Optional[Tuple[int, int, int]] = None, povm_service: Optional[PovmService] = None):
        self.povms = povm_service or PovmService(frame_service=FrameService())
        self.providers: Dict[str, DetectorProvider] = {}
        self._initialize_providers(grid_shape)

    def _initialize_providers(self, grid_shape: Optional[Tuple[int, int, int]]):
        self.providers["weyl"] = WeylProvider(self.povms)
        self.providers["sud"] = SudProvider(self.povms)
        su2_grid = tuple(settings.su2_grid) if grid_shape is None else grid_shape
        self.providers["su2"] = Su2Provider(self.povms, grid_shape=su2_grid)
        self.providers["locc"] = LoccProvider(self.povms)

    def get_provider(self, spec: DetectorSpec) -> DetectorProvider:
        if spec.family not in self.providers:
            raise ConfigError(
                f"Unknown detector family '{spec.family}'; available: {', '.join(self.available())}",
                field="detector",
                value=spec.family,
            )
        return self.providers[spec.family]

    def available(self) -> List[str]:
        return sorted(self.providers)

    def resolve(self, identifier: str) -> Tuple[DetectorSpec, DetectorProvider]:
        spec = parse_detector_id(identifier)
        provider = self.get_provider(spec)
        provider.system_dimension(spec)
        return spec, provider

    def build_detector(self, identifier: str, ancilla: Optional[State] = None) -> UniversalDetector:
        """
        Build a detector, checking universality of the ancilla first

        Raises:
            ConfigError: malformed identifier
            NotUniversalError: the induced family does not span
        """
        spec, provider = self.resolve(identifier)
        ancilla = ancilla or provider.default_ancilla(spec)
        report = provider.universality(spec, ancilla)
        if not report.spans:
            logger.warning("Ancilla is not universal", detector=identifier, rank=report.rank, dimension=report.dimension)
            raise NotUniversalError(
                f"Detector '{identifier}' is not universal with this ancilla: rank {report.rank} of {report.dimension}",
                rank=report.rank,
                dimension=report.dimension,
                least_singular_value=report.least_singular_value,
            )
        return provider.build(spec, ancilla)
