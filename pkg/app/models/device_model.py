from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from app.config.settings import settings


class LinearCost(BaseModel):
    """Compute time a·j + b for j shards, as found by the profiler."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["linear"] = "linear"
    a: float = Field(description="Seconds per shard")
    b: float = Field(default=0.0, description="Fixed seconds per round")

    def compute(self, shards: int) -> float:
        return self.a * shards + self.b

    @property
    def max_shards(self) -> Optional[int]:
        return None


class TableCost(BaseModel):
    """Measured compute time per shard count; costs[j - 1] is the time for j shards."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["table"] = "table"
    costs: tuple[float, ...] = Field(min_length=1)

    def compute(self, shards: int) -> float:
        return self.costs[shards - 1]

    @property
    def max_shards(self) -> Optional[int]:
        return len(self.costs)


CostModel = Annotated[Union[LinearCost, TableCost], Field(discriminator="kind")]


class DeviceProfile(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    id: int = Field(ge=0)
    name: Optional[str] = None
    cost_model: CostModel
    comm_up: float = Field(default=0.0, description="Uplink latency for one model upload")
    comm_down: float = Field(default=0.0, description="Downlink latency for one model download")
    capacity: Optional[int] = Field(default=None, description="Shard capacity, None when unbounded")
    classes: Optional[frozenset[int]] = Field(default=None, description="Class labels held, None for all")

    @property
    def label(self) -> str:
        return self.name or f"device-{self.id}"

    def __repr__(self) -> str:
        return (
            f"<DeviceProfile(id={self.id}, "
            f"name={self.name}, "
            f"cost_model={self.cost_model.kind}, "
            f"capacity={self.capacity})>"
        )


def _default_class_set() -> frozenset[int]:
    return frozenset(range(settings.N_CLASSES))


class TrainingTask(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    total_shards: int = Field(description="Total shards D to distribute")
    shard_size: int = Field(default_factory=lambda: settings.SHARD_SIZE, gt=0)
    class_set: frozenset[int] = Field(default_factory=_default_class_set, min_length=1)
    alpha: float = Field(default_factory=lambda: settings.ALPHA_SMALL_MODEL, gt=0)
