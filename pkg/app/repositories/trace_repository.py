import json
import logging
from pathlib import Path
from typing import Union

from pydantic import ValidationError

from app.exceptions import TraceParseError
from app.models.profile_model import ArchSample
from app.repositories.json_file import describe_validation_error, read_json

logger = logging.getLogger(__name__)


class TraceRepository:
    """Profiling traces: a JSON array of runs, or JSON Lines with one run per line.

    Each run is {"device", "conv_params", "dense_params", "data_batches", "seconds"}.
    """

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    def _load_lines(self, text: str) -> list[ArchSample]:
        samples = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise TraceParseError(
                    f"{self.path}:{lineno}:{e.colno}: {e.msg}",
                    details={"path": str(self.path), "line": lineno, "column": e.colno},
                )
            try:
                samples.append(ArchSample.model_validate(record))
            except ValidationError as e:
                raise TraceParseError(
                    f"{self.path}:{lineno}: {describe_validation_error(e)}",
                    details={"path": str(self.path), "line": lineno},
                )
        return samples

    def _load_array(self) -> list[ArchSample]:
        records = read_json(self.path, TraceParseError)
        if not isinstance(records, list):
            raise TraceParseError(f"{self.path}: expected a JSON array of runs")
        samples = []
        for index, record in enumerate(records):
            try:
                samples.append(ArchSample.model_validate(record))
            except ValidationError as e:
                raise TraceParseError(
                    f"{self.path}: run {index}: {describe_validation_error(e)}",
                    details={"path": str(self.path), "record": index},
                )
        return samples

    def load_samples(self) -> list[ArchSample]:
        try:
            text = self.path.read_text(encoding="utf-8")
        except OSError as e:
            raise TraceParseError(f"{self.path}: cannot read file ({e.strerror or e})", details={"path": str(self.path)})

        samples = self._load_array() if text.lstrip().startswith("[") else self._load_lines(text)
        if not samples:
            raise TraceParseError(f"{self.path}: trace contains no runs")

        logger.info(f"Loaded {len(samples)} runs from {self.path}")
        return samples
