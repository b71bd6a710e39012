"""
Pydantic schemas for configuration, records and reports
"""
from .operator import FamilyRecord, LabelledOperatorRecord, OperatorRecord
from .detector import DetectorRecord, PovmRecord, ProcessingRecord
from .experiment import ExperimentConfig
from .report import CSV_COLUMNS, CheckResult, EstimationReport, ValidationReport

__all__ = [
    # Operator records
    "OperatorRecord", "LabelledOperatorRecord", "FamilyRecord",

    # Detector records
    "DetectorRecord", "PovmRecord", "ProcessingRecord",

    # Experiment config
    "ExperimentConfig",

    # Reports
    "CSV_COLUMNS", "CheckResult", "EstimationReport", "ValidationReport",
]
