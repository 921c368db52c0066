import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class LayeredGradient(BaseModel):
    model_config = ConfigDict(frozen=True)

    layers: tuple[tuple[float, ...], ...] = Field(min_length=1)

    @field_validator("layers")
    @classmethod
    def check_finite(cls, layers):
        for index, layer in enumerate(layers):
            if not all(math.isfinite(value) for value in layer):
                raise ValueError(f"layer {index} contains a non-finite entry")
        return layers

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(layer) for layer in self.layers)


class DiversityEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    user: int
    diversity: Optional[float]
    degenerate: bool = False
