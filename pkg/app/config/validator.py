import json
import logging
import math

logger = logging.getLogger(__name__)


def validate_json_list(value, field_name: str = "field") -> list:
    if isinstance(value, str):
        if not value or value.isspace():
            raise ValueError(f"{field_name} cannot be empty")
        try:
            parsed = json.loads(value)
            if not isinstance(parsed, list):
                raise ValueError(f"{field_name} must be a JSON array")
            return parsed
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON for {field_name}: {e}")
    elif isinstance(value, (list, tuple)):
        return list(value)
    raise ValueError(f"{field_name} must be a list or JSON string, got {type(value)}")


def parse_grid(value: str, field_name: str = "grid", positive: bool = False) -> list[float]:
    """Parse a LO:HI:STEP range into an inclusive list of floats; `positive` requires LO > 0."""
    parts = value.split(":")
    if len(parts) != 3:
        raise ValueError(f"{field_name} must look like LO:HI:STEP, got {value!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as e:
        raise ValueError(f"Invalid number in {field_name}: {e}")
    if not all(math.isfinite(v) for v in (lo, hi, step)):
        raise ValueError(f"{field_name} needs finite bounds, got {value!r}")
    if step <= 0 or hi < lo:
        raise ValueError(f"{field_name} needs STEP > 0 and HI >= LO, got {value!r}")
    if positive and lo <= 0:
        raise ValueError(f"{field_name} needs LO > 0, got {value!r}")

    count = int(round((hi - lo) / step)) + 1
    grid = [round(lo + k * step, 12) for k in range(count)]
    grid = [g for g in grid if g <= hi + step * 1e-9]
    logger.debug(f"Parsed {field_name} {value!r} into {len(grid)} points")
    return grid
