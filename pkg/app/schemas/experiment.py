"""
Experiment configuration schema
"""
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.schemas.operator import OperatorRecord


class ExperimentConfig(BaseModel):
    """
    Single JSON document describing one experiment.

    ``state`` accepts "random:rank=r[:seed=s]", "basis:k", "mixed" or an
    operator record; ``observable`` accepts "identity", "weyl:p,q",
    "pauli:X|Y|Z", "projector:k", "spin:x|y|z", "random[:seed=s]" or an
    operator record.
    """
    model_config = ConfigDict(extra="forbid")

    # Detector
    detector: str = Field(..., min_length=1)
    ancilla: Union[Literal["auto"], OperatorRecord] = "auto"
    grid: Optional[List[int]] = Field(default=None, min_length=3, max_length=3)

    # Experiment
    state: Optional[Union[str, OperatorRecord]] = None
    observable: Optional[Union[str, OperatorRecord]] = None
    n: Optional[int] = Field(default=None, ge=2)
    seed: Optional[int] = None
    schedule: Optional[List[int]] = None
    validation_pairs: int = Field(default=100, ge=1)

    # Execution and output
    workers: Optional[int] = Field(default=None, ge=1)
    out: Optional[str] = None
    format: Literal["json", "csv", "both"] = "both"

    @field_validator("schedule")
    @classmethod
    def check_schedule(cls, v):
        if v is None:
            return v
        if not v:
            raise ValueError("schedule must not be empty")
        if any(n < 2 for n in v):
            raise ValueError("every schedule entry must be at least 2")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("schedule must be strictly increasing")
        return v

    @field_validator("grid")
    @classmethod
    def check_grid(cls, v):
        if v is not None and any(size < 1 for size in v):
            raise ValueError("grid sizes must be positive")
        return v
