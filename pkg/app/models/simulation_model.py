from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config.settings import settings
from app.models.device_model import DeviceProfile, TrainingTask
from app.models.schedule_model import Schedule


class ConvergenceModel(BaseModel):
    """Accuracy p(x) = A - exp(-beta * x) after x epochs of k seconds each."""

    model_config = ConfigDict(frozen=True)

    A: float = Field(gt=0, le=1)
    beta: float = Field(gt=0)
    k: float = Field(gt=0)


class ConvergenceParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    A: float = Field(gt=0, le=1)
    beta: float = Field(gt=0)


class IidMode(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["iid"] = "iid"
    imbalance_ratio: float = Field(default=0.0, ge=0)


class NonIidMode(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["noniid"] = "noniid"
    max_classes: int = Field(default_factory=lambda: settings.NON_IID_MAX_CLASSES, ge=1)
    n_classes: int = Field(default_factory=lambda: settings.N_CLASSES, ge=1)

    @model_validator(mode="after")
    def check_subset_size(self):
        if self.max_classes > self.n_classes:
            raise ValueError(f"max_classes {self.max_classes} exceeds n_classes {self.n_classes}")
        return self


ScenarioMode = Annotated[Union[IidMode, NonIidMode], Field(discriminator="kind")]


class ScenarioSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0)
    n_users: int = Field(ge=1)
    total_samples: int = Field(ge=1)
    mode: ScenarioMode = Field(default_factory=IidMode)


class ScenarioUser(BaseModel):
    model_config = ConfigDict(frozen=True)

    samples: int
    classes: tuple[int, ...]
    class_counts: tuple[int, ...]


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True)

    spec: ScenarioSpec
    users: tuple[ScenarioUser, ...]
    coverage: tuple[int, ...]

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(user.samples for user in self.users)


class EpochEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    target: float
    epochs: float
    epochs_ceil: int
    total_time: float


class BreakEven(BaseModel):
    model_config = ConfigDict(frozen=True)

    bound: float
    crossings: tuple[float, ...]
    reachable: tuple[float, float]


class SchedulerOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    scheduler: str
    schedule: Schedule
    round_makespan: float
    speedup: Optional[float] = None
    convergence: Optional[ConvergenceModel] = None
    targets: tuple[EpochEstimate, ...] = ()
    unreachable_targets: tuple[float, ...] = ()


class ProfilingGap(BaseModel):
    model_config = ConfigDict(frozen=True)

    scheduler: str
    estimated_makespan: float
    realized_makespan: float
    optimal_makespan: float
    relative_gap: float


class CampaignSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    devices: tuple[DeviceProfile, ...]
    task: TrainingTask
    schedulers: tuple[Literal["fed_lbap", "mincost", "equal_split", "proportional", "random"], ...] = (
        "fed_lbap", "mincost", "equal_split", "proportional", "random",
    )
    convergence: dict[str, ConvergenceParams] = Field(default_factory=dict)
    targets: tuple[float, ...] = Field(default_factory=lambda: tuple(settings.TARGET_ACCURACIES))
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0)
    scenario: Optional[ScenarioSpec] = None
    estimated_devices: Optional[tuple[DeviceProfile, ...]] = None


class CampaignReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int
    total_shards: int
    outcomes: tuple[SchedulerOutcome, ...]
    break_even: Optional[BreakEven] = None
    profiling_gaps: tuple[ProfilingGap, ...] = ()
    scenario: Optional[Scenario] = None
