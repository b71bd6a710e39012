"""
Detector description records
"""
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, Field

from app.models.povm import ContinuousBellPovm, Povm, UniversalDetector
from app.schemas.operator import OperatorRecord

ProcessingKind = Literal["generic-dual", "weyl-closed-form", "sud-xi", "locc"]


class ProcessingRecord(BaseModel):
    """Schema for the classical processing rule"""
    kind: ProcessingKind
    params: Dict[str, Any] = Field(default_factory=dict)


class PovmRecord(BaseModel):
    """Schema for a POVM summary: discrete outcome count or continuous group"""
    kind: Literal["discrete", "continuous"]
    dims: list
    outcomes: Optional[int] = None
    group: Optional[str] = None
    grid: Optional[list] = None


class DetectorRecord(BaseModel):
    """Schema for a universal detector"""
    label: str
    povm: PovmRecord
    ancilla: OperatorRecord
    processing: ProcessingRecord

    @classmethod
    def from_detector(cls, detector: UniversalDetector) -> "DetectorRecord":
        povm = detector.povm
        if isinstance(povm, Povm):
            povm_record = PovmRecord(kind="discrete", dims=list(povm.dims), outcomes=len(povm))
        else:
            grid = list(povm.grid.shape) if isinstance(povm, ContinuousBellPovm) and povm.grid is not None else None
            povm_record = PovmRecord(kind="continuous", dims=list(povm.dims), group=povm.group, grid=grid)

        return cls(
            label=detector.label,
            povm=povm_record,
            ancilla=OperatorRecord.from_operator(detector.ancilla.op),
            processing=ProcessingRecord(kind=detector.processing.kind, params=detector.processing.params()),
        )
