"""
Report serialisation: JSON through orjson, CSV through pandas
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import orjson
import pandas as pd
import structlog
from pydantic import BaseModel

from app.config import settings
from app.schemas.report import CSV_COLUMNS, EstimationReport

logger = structlog.get_logger(__name__)

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2


class ReportService:
    """
    Writes reports so that identical runs give byte-identical files.

    Wall-clock time is only written when ``record_wall_time`` is set.
    """

    def __init__(self, record_wall_time: Optional[bool] = None):
        self.record_wall_time = settings.record_wall_time if record_wall_time is None else record_wall_time

    def _payload(self, report: BaseModel) -> Dict[str, Any]:
        data = report.model_dump(mode="json")
        if "wall_s" in data and not self.record_wall_time:
            data["wall_s"] = None
        return data

    def to_json(self, payload: Union[BaseModel, Sequence[BaseModel], Dict[str, Any]]) -> bytes:
        if isinstance(payload, BaseModel):
            data: Any = self._payload(payload)
        elif isinstance(payload, dict):
            data = payload
        else:
            data = [self._payload(item) for item in payload]
        return orjson.dumps(data, option=JSON_OPTIONS) + b"\n"

    def to_frame(self, reports: Sequence[EstimationReport]) -> pd.DataFrame:
        rows = [report.csv_row(include_wall_time=self.record_wall_time) for report in reports]
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def to_csv(self, reports: Sequence[EstimationReport]) -> str:
        return self.to_frame(reports).to_csv(index=False, lineterminator="\n")

    def write_json(self, path: Path, payload) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_json(payload))
        logger.info("Wrote report", path=str(path), format="json")
        return path

    def write_csv(self, path: Path, reports: Sequence[EstimationReport]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv(reports), encoding="utf-8")
        logger.info("Wrote report", path=str(path), format="csv", rows=len(reports))
        return path

    def write_reports(self, out_dir: Path, stem: str, reports: List[EstimationReport], fmt: str) -> List[Path]:
        """Write ``stem``.json and/or ``stem``.csv into ``out_dir``"""
        out_dir = Path(out_dir)
        written = []
        if fmt in ("json", "both"):
            payload = reports[0] if len(reports) == 1 and stem == "estimate" else reports
            written.append(self.write_json(out_dir / f"{stem}.json", payload))
        if fmt in ("csv", "both"):
            written.append(self.write_csv(out_dir / f"{stem}.csv", reports))
        return written

    @staticmethod
    def loglog_summary(reports: Sequence[EstimationReport]) -> str:
        """Plain-text table of stderr against n with the local log-log slope"""
        lines = [f"{'n':>12}  {'stderr':>14}  {'slope':>8}"]
        previous = None
        for report in reports:
            slope = ""
            if previous is not None and previous.stderr > 0 and report.stderr > 0:
                value = np.log(report.stderr / previous.stderr) / np.log(report.n / previous.n)
                slope = f"{value:8.3f}"
            lines.append(f"{report.n:>12d}  {report.stderr:>14.6e}  {slope:>8}")
            previous = report
        return "\n".join(lines)
