"""
Estimation and validation report schemas
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from app.schemas.detector import DetectorRecord

CSV_COLUMNS = [
    "detector",
    "d",
    "observable",
    "n",
    "estimate_re",
    "estimate_im",
    "stderr",
    "exact_re",
    "exact_im",
    "seed",
    "wall_s",
]


class EstimationReport(BaseModel):
    """Schema for one Monte Carlo estimate of Tr[ρO]"""
    detector: str
    d: int = Field(..., ge=1)
    observable: str
    n: int = Field(..., ge=1)
    seed: int

    # Estimate
    estimate_re: float
    estimate_im: float
    stderr: float = Field(..., ge=0.0)

    # Reference value, when a closed form is available
    exact_re: Optional[float] = None
    exact_im: Optional[float] = None

    # Diagnostics
    second_moment: float = Field(..., ge=0.0)
    imag_residual: Optional[float] = None
    acceptance_rate: Optional[float] = None
    wall_s: Optional[float] = None

    @property
    def estimate(self) -> complex:
        return complex(self.estimate_re, self.estimate_im)

    @property
    def exact(self) -> Optional[complex]:
        if self.exact_re is None:
            return None
        return complex(self.exact_re, self.exact_im or 0.0)

    def z_score(self) -> Optional[float]:
        """|estimate − exact| / stderr, None without an exact value or with zero stderr"""
        if self.exact is None or self.stderr == 0.0:
            return None
        return abs(self.estimate - self.exact) / self.stderr

    def csv_row(self, include_wall_time: bool = False) -> Dict[str, Any]:
        row = self.model_dump()
        if not include_wall_time:
            row["wall_s"] = None
        return {column: row[column] for column in CSV_COLUMNS}


class CheckResult(BaseModel):
    """Schema for a single validation check"""
    name: str
    passed: bool
    details: Dict[str, Any] = Field(default_factory=dict)


class ValidationReport(BaseModel):
    """Schema for the outcome of the validate command"""
    detector: str
    d: int
    checks: List[CheckResult]
    record: Optional[DetectorRecord] = None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)
