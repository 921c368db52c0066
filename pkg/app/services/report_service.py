import csv
import io
import json
import logging
import math
from typing import Any, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from app.config.settings import settings

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv", "table")


class ReportService:
    """Renders command results; JSON is canonical, csv and table are views of `rows`."""

    @staticmethod
    def format_float(value: float) -> Any:
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        rounded = float(f"{value:.{settings.OUTPUT_SIGNIFICANT_DIGITS}g}")
        return 0.0 if rounded == 0 else rounded

    @staticmethod
    def to_jsonable(value: Any) -> Any:
        if isinstance(value, BaseModel):
            return ReportService.to_jsonable(value.model_dump())
        if isinstance(value, dict):
            return {str(key): ReportService.to_jsonable(item) for key, item in value.items()}
        if isinstance(value, (set, frozenset)):
            return [ReportService.to_jsonable(item) for item in sorted(value)]
        if isinstance(value, (list, tuple, np.ndarray)):
            return [ReportService.to_jsonable(item) for item in value]
        if isinstance(value, (bool, np.bool_)):
            return bool(value)
        if isinstance(value, (int, np.integer)):
            return int(value)
        if isinstance(value, (float, np.floating)):
            return ReportService.format_float(float(value))
        return value

    @staticmethod
    def dumps(payload: Any) -> str:
        return json.dumps(ReportService.to_jsonable(payload), indent=2, ensure_ascii=False)

    @staticmethod
    def _cell(value: Any) -> str:
        value = ReportService.to_jsonable(value)
        if isinstance(value, list):
            return " ".join(str(item) for item in value)
        if value is None:
            return ""
        return str(value)

    @staticmethod
    def render(payload: Any, rows: Optional[Sequence[dict]] = None, fmt: str = "json") -> str:
        if fmt == "json" or not rows:
            if fmt != "json":
                logger.debug(f"No tabular rows for format {fmt}, falling back to json")
            return ReportService.dumps(payload) + "\n"

        columns = list(rows[0].keys())
        cells = [[ReportService._cell(row.get(column)) for column in columns] for row in rows]

        if fmt == "csv":
            buffer = io.StringIO()
            writer = csv.writer(buffer, lineterminator="\n")
            writer.writerow(columns)
            writer.writerows(cells)
            return buffer.getvalue()

        widths = [max(len(column), *(len(row[i]) for row in cells)) for i, column in enumerate(columns)]
        lines = ["  ".join(column.ljust(width) for column, width in zip(columns, widths)).rstrip()]
        lines.append("  ".join("-" * width for width in widths))
        for row in cells:
            lines.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
        return "\n".join(lines) + "\n"


report_service = ReportService()
