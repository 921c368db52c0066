import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class Schedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    scheduler: str
    assignment: tuple[int, ...]
    makespan: float
    per_device_cost: tuple[float, ...]
    total_cost: Optional[float] = None

    @property
    def total_shards(self) -> int:
        return sum(self.assignment)

    @property
    def participants(self) -> tuple[int, ...]:
        return tuple(i for i, shards in enumerate(self.assignment) if shards > 0)


class CostMatrix(BaseModel):
    """Row i, column j - 1 holds the cost of giving j shards to device i."""

    model_config = ConfigDict(frozen=True)

    entries: tuple[tuple[float, ...], ...]

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def s(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def as_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)

    def cost(self, device: int, shards: int) -> float:
        if shards == 0:
            return 0.0
        return self.entries[device][shards - 1]

    def row_capacity(self, device: int) -> int:
        return sum(1 for value in self.entries[device] if math.isfinite(value))


class AccuracyWeights(BaseModel):
    model_config = ConfigDict(frozen=True)

    weights: tuple[float, ...]
    costs: tuple[float, ...]
    lowest_weight: int = Field(description="w_l = |C| - max_i |C_i|")


class PopulationView(BaseModel):
    model_config = ConfigDict(frozen=True)

    populations: tuple[frozenset[int], ...]
    lowest_weight: int


class GreedyStep(BaseModel):
    model_config = ConfigDict(frozen=True)

    step: int
    chosen: int
    candidates: tuple[Optional[float], ...]


class GreedyResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    schedule: Schedule
    trace: tuple[GreedyStep, ...] = ()


class AlternationPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    first_device: int
    phase_one_shards: int
    slope_ratio: int
    assignment: tuple[int, int]


class AnalyticalSolution(BaseModel):
    model_config = ConfigDict(frozen=True)

    optimal_time: float
    relaxed: tuple[float, ...]
    schedule: Schedule

    @property
    def integral_gap(self) -> float:
        return self.schedule.makespan - self.optimal_time


class AlphaSweepRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    assignment: tuple[int, ...]
    total_cost: float
    makespan: float


class OracleSolution(BaseModel):
    model_config = ConfigDict(frozen=True)

    objective: float
    assignment: tuple[int, ...]
    evaluated: int
