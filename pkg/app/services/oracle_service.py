import logging
import math
from typing import Optional, Sequence

from app.config.settings import settings
from app.exceptions import Infeasible, TooLarge
from app.models.device_model import DeviceProfile, TrainingTask
from app.models.schedule_model import AccuracyWeights, CostMatrix, OracleSolution
from app.services.cost_service import cost_service

logger = logging.getLogger(__name__)


class OracleService:
    """Exhaustive reference solvers for small instances."""

    def __init__(
        self,
        max_users: Optional[int] = None,
        max_shards: Optional[int] = None,
        max_enumeration: Optional[int] = None,
    ):
        self.max_users = max_users or settings.ORACLE_MAX_USERS
        self.max_shards = max_shards or settings.ORACLE_MAX_SHARDS
        self.max_enumeration = max_enumeration or settings.ORACLE_MAX_ENUMERATION

    def check_size(self, limits: Sequence[int]) -> None:
        if len(limits) > self.max_users:
            raise TooLarge(f"{len(limits)} devices exceed the oracle cap of {self.max_users}")
        if max(limits, default=0) > self.max_shards:
            raise TooLarge(f"{max(limits)} shards per device exceed the oracle cap of {self.max_shards}")
        size = math.prod(limit + 1 for limit in limits)
        if size > self.max_enumeration:
            raise TooLarge(f"{size} compositions exceed the enumeration cap of {self.max_enumeration}")

    def oracle_minmax(self, matrix: CostMatrix, total_shards: int) -> OracleSolution:
        limits = [matrix.row_capacity(i) for i in range(matrix.n)]
        self.check_size(limits)

        best: dict = {"value": math.inf, "assignment": None}
        evaluated = 0
        current = [0] * matrix.n
        room_after = [sum(limits[i + 1:]) for i in range(matrix.n)]

        def descend(device: int, remaining: int, running: float) -> None:
            nonlocal evaluated
            if device == matrix.n:
                evaluated += 1
                if remaining == 0 and running < best["value"]:
                    best["value"] = running
                    best["assignment"] = tuple(current)
                return
            for shards in range(0, min(limits[device], remaining) + 1):
                if remaining - shards > room_after[device]:
                    continue
                peak = max(running, matrix.cost(device, shards))
                if peak >= best["value"]:
                    # Costs grow with shards, so larger counts cannot improve either.
                    break
                current[device] = shards
                descend(device + 1, remaining - shards, peak)
            current[device] = 0

        descend(0, total_shards, 0.0)
        if best["assignment"] is None:
            raise Infeasible(f"no composition of D={total_shards} fits the cost matrix")

        logger.debug(f"Oracle min-max {best['value']} at {best['assignment']} after {evaluated} leaves")
        return OracleSolution(objective=best["value"], assignment=best["assignment"], evaluated=evaluated)

    def oracle_mincost(
        self,
        profiles: Sequence[DeviceProfile],
        weights: AccuracyWeights,
        task: TrainingTask,
    ) -> OracleSolution:
        total = task.total_shards
        limits = [cost_service.shard_limit(p, total) for p in profiles]
        self.check_size(limits)

        n = len(profiles)
        best: dict = {"value": math.inf, "assignment": None}
        evaluated = 0
        current = [0] * n
        room_after = [sum(limits[i + 1:]) for i in range(n)]

        def descend(device: int, remaining: int, running: float) -> None:
            nonlocal evaluated
            if device == n:
                evaluated += 1
                if remaining == 0 and running < best["value"]:
                    best["value"] = running
                    best["assignment"] = tuple(current)
                return
            for shards in range(0, min(limits[device], remaining) + 1):
                if remaining - shards > room_after[device]:
                    continue
                added = 0.0
                if shards > 0:
                    added = cost_service.cost_of(profiles[device], shards) + weights.costs[device]
                if running + added >= best["value"]:
                    continue
                current[device] = shards
                descend(device + 1, remaining - shards, running + added)
            current[device] = 0

        descend(0, total, 0.0)
        if best["assignment"] is None:
            raise Infeasible(f"no composition of D={total} respects the device capacities")

        logger.debug(f"Oracle min-cost {best['value']} at {best['assignment']} after {evaluated} leaves")
        return OracleSolution(objective=best["value"], assignment=best["assignment"], evaluated=evaluated)


oracle_service = OracleService()
