"""
Operator and family records: {dims: [h, k], re: [[...]], im: [[...]]}
"""
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, RootModel, model_validator

from app.models.frame import OperatorFamily
from app.models.operator import Operator


class OperatorRecord(BaseModel):
    """Schema for a dense complex operator, row-major nested arrays"""
    model_config = ConfigDict(extra="forbid")

    dims: List[int] = Field(..., min_length=2, max_length=2)
    re: List[List[float]]
    im: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def check_shape(self):
        h, k = self.dims
        if h < 1 or k < 1:
            raise ValueError(f"dims must be positive, got {self.dims}")
        for name, rows in (("re", self.re), ("im", self.im)):
            if rows is None:
                continue
            if len(rows) != h or any(len(row) != k for row in rows):
                raise ValueError(f"'{name}' does not have shape {h}x{k}")
        return self

    def to_operator(self) -> Operator:
        entries = np.asarray(self.re, dtype=np.float64).astype(np.complex128)
        if self.im is not None:
            entries = entries + 1j * np.asarray(self.im, dtype=np.float64)
        return Operator(entries)

    @classmethod
    def from_operator(cls, op: Operator) -> "OperatorRecord":
        return cls(
            dims=list(op.dims),
            re=op.entries.real.tolist(),
            im=op.entries.imag.tolist(),
        )


class LabelledOperatorRecord(OperatorRecord):
    """Family member with its index label"""
    label: str


class FamilyRecord(RootModel[List[LabelledOperatorRecord]]):
    """JSON array of labelled operator records"""

    def to_family(self) -> OperatorFamily:
        members = tuple(record.to_operator() for record in self.root)
        return OperatorFamily(members, tuple(record.label for record in self.root))

    @classmethod
    def from_family(cls, family: OperatorFamily) -> "FamilyRecord":
        return cls(
            [
                LabelledOperatorRecord(label=label, **OperatorRecord.from_operator(member).model_dump())
                for label, member in zip(family.labels, family.members)
            ]
        )
