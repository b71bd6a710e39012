"""
Numerical services of the Universal Detector Lab
"""
from .frame_service import FrameService
from .povm_service import GenericDualProcessing, PovmService
from .weyl_service import WeylClosedFormProcessing, WeylService
from .sud_service import SudService, SudXiProcessing
from .su2_service import Su2Service
from .locc_service import LoccProcessing, LoccService
from .estimation_service import EstimationService
from .detector_registry import DetectorRegistry, DetectorSpec, parse_detector_id
from .report_service import ReportService

__all__ = [
    "FrameService",
    "PovmService",
    "GenericDualProcessing",
    "WeylService",
    "WeylClosedFormProcessing",
    "SudService",
    "SudXiProcessing",
    "Su2Service",
    "LoccService",
    "LoccProcessing",
    "EstimationService",
    "DetectorRegistry",
    "DetectorSpec",
    "parse_detector_id",
    "ReportService",
]
