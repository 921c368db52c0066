import logging
import math
from typing import Optional, Sequence

from app.exceptions import (
    EmptyDeviceList,
    InvalidCapacity,
    NegativeLatency,
    NonMonotoneCost,
    NonPositiveSlope,
    ShardsOutOfRange,
    UnknownClass,
    ZeroShards,
)
from app.models.device_model import DeviceProfile, LinearCost, TableCost, TrainingTask
from app.models.schedule_model import Schedule

logger = logging.getLogger(__name__)


class CostService:

    @staticmethod
    def validate_profiles(
        profiles: Sequence[DeviceProfile],
        task: TrainingTask,
    ) -> tuple[list[DeviceProfile], TrainingTask]:
        """Check the per-device invariants; total capacity is left to the solvers."""
        if not profiles:
            raise EmptyDeviceList("at least one device is required")
        if task.total_shards < 1:
            raise ZeroShards(f"total_shards must be >= 1, got {task.total_shards}")

        for profile in profiles:
            for field_name in ("comm_up", "comm_down"):
                value = getattr(profile, field_name)
                if not math.isfinite(value) or value < 0:
                    raise NegativeLatency(
                        f"{profile.label}: {field_name} must be finite and non-negative, got {value}",
                        details={"device": profile.id},
                    )

            model = profile.cost_model
            if isinstance(model, LinearCost):
                if not (math.isfinite(model.a) and math.isfinite(model.b)):
                    raise NonPositiveSlope(f"{profile.label}: linear cost parameters must be finite")
                if model.a <= 0:
                    raise NonPositiveSlope(
                        f"{profile.label}: linear slope must be positive, got a={model.a}",
                        details={"device": profile.id},
                    )
            elif isinstance(model, TableCost):
                previous = 0.0
                for shards, value in enumerate(model.costs, start=1):
                    if not math.isfinite(value) or value < previous:
                        raise NonMonotoneCost(
                            f"{profile.label}: cost for {shards} shards ({value}) is below "
                            f"the cost for {shards - 1} shards ({previous})",
                            details={"device": profile.id, "shards": shards},
                        )
                    previous = value

            if profile.capacity is not None and profile.capacity < 0:
                raise InvalidCapacity(f"{profile.label}: capacity must be >= 0, got {profile.capacity}")

            if profile.classes is not None and not profile.classes <= task.class_set:
                unknown = sorted(profile.classes - task.class_set)
                raise UnknownClass(
                    f"{profile.label}: classes {unknown} are not in the task's class set",
                    details={"device": profile.id, "classes": unknown},
                )

        logger.debug(f"Validated {len(profiles)} device profiles for D={task.total_shards}")
        return list(profiles), task

    @staticmethod
    def cost_of(profile: DeviceProfile, shards: int) -> float:
        """Round time of a device holding `shards` shards; non-participants cost nothing."""
        if shards < 0:
            raise ShardsOutOfRange(f"{profile.label}: shard count must be >= 0, got {shards}")
        if shards == 0:
            return 0.0

        limit = profile.cost_model.max_shards
        if limit is not None and shards > limit:
            raise ShardsOutOfRange(
                f"{profile.label}: cost table covers {limit} shards, asked for {shards}",
                details={"device": profile.id, "shards": shards},
            )
        return profile.cost_model.compute(shards) + profile.comm_up + profile.comm_down

    @staticmethod
    def max_shards(profile: DeviceProfile) -> Optional[int]:
        return profile.cost_model.max_shards

    @staticmethod
    def class_set_of(profile: DeviceProfile, task: TrainingTask) -> frozenset[int]:
        return task.class_set if profile.classes is None else profile.classes

    @staticmethod
    def schedule_from_assignment(
        scheduler: str,
        profiles: Sequence[DeviceProfile],
        assignment: Sequence[int],
        total_cost: Optional[float] = None,
    ) -> Schedule:
        per_device = tuple(CostService.cost_of(p, shards) for p, shards in zip(profiles, assignment))
        participants = [cost for cost, shards in zip(per_device, assignment) if shards > 0]
        return Schedule(
            scheduler=scheduler,
            assignment=tuple(int(shards) for shards in assignment),
            makespan=max(participants, default=0.0),
            per_device_cost=per_device,
            total_cost=total_cost,
        )

    @staticmethod
    def shard_limit(profile: DeviceProfile, total_shards: int, use_capacity: bool = True) -> int:
        """Largest shard count the device can take in a schedule of `total_shards`."""
        limit = total_shards
        table_limit = profile.cost_model.max_shards
        if table_limit is not None:
            limit = min(limit, table_limit)
        if use_capacity and profile.capacity is not None:
            limit = min(limit, profile.capacity)
        return limit


cost_service = CostService()
