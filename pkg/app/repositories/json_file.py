import json
import logging
from pathlib import Path
from typing import Any, Type

from app.exceptions import InputError, InvalidRunConfig

logger = logging.getLogger(__name__)


def read_json(path: Path, error_class: Type[InputError] = InvalidRunConfig) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise error_class(f"{path}: cannot read file ({e.strerror or e})", details={"path": str(path)})

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise error_class(
            f"{path}:{e.lineno}:{e.colno}: {e.msg}",
            details={"path": str(path), "line": e.lineno, "column": e.colno},
        )

    logger.debug(f"Loaded {path}")
    return data


def describe_validation_error(error) -> str:
    """First pydantic error as `loc: msg`, enough to point at the offending field."""
    first = error.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "<root>"
    extra = f" (+{error.error_count() - 1} more)" if error.error_count() > 1 else ""
    return f"{location}: {first['msg']}{extra}"
