import logging
import math
from typing import Optional, Sequence

import numpy as np

from app.config.settings import settings
from app.exceptions import Infeasible, NonLinearProfile, NonMonotoneCost, ShardsOutOfRange
from app.models.device_model import DeviceProfile, LinearCost, TrainingTask
from app.models.schedule_model import AnalyticalSolution, CostMatrix, Schedule
from app.services.cost_service import cost_service

logger = logging.getLogger(__name__)


class LbapService:
    """Min-makespan partitioning of IID shards across devices."""

    @staticmethod
    def build_cost_matrix(
        profiles: Sequence[DeviceProfile],
        task: TrainingTask,
        s: Optional[int] = None,
    ) -> CostMatrix:
        n = len(profiles)
        total = task.total_shards
        strict = s is not None

        if s is None:
            limits = [cost_service.max_shards(p) for p in profiles]
            s = total if any(limit is None for limit in limits) else max(limits)

        if n * s < total:
            raise Infeasible(f"{n} devices x {s} shards cannot hold D={total}")

        rows = []
        for profile in profiles:
            limit = cost_service.max_shards(profile)
            if limit is not None and limit < s and strict:
                raise ShardsOutOfRange(
                    f"{profile.label}: cost table covers {limit} shards, matrix needs {s}",
                    details={"device": profile.id},
                )
            covered = s if limit is None else min(limit, s)
            row = [cost_service.cost_of(profile, j) for j in range(1, covered + 1)]
            row.extend([math.inf] * (s - covered))
            if any(later < earlier for earlier, later in zip(row, row[1:])):
                raise NonMonotoneCost(f"{profile.label}: cost row is not non-decreasing")
            rows.append(tuple(row))

        matrix = CostMatrix(entries=tuple(rows))
        if sum(matrix.row_capacity(i) for i in range(n)) < total:
            raise Infeasible(f"cost tables cover fewer than D={total} shards in total")

        logger.debug(f"Built {n}x{s} cost matrix for D={total}")
        return matrix

    @staticmethod
    def feasible_at(matrix: CostMatrix, threshold: float, total_shards: int) -> tuple[bool, tuple[int, ...]]:
        """Per-device shard caps under `threshold`, and whether they cover D."""
        values = matrix.as_array()
        caps = tuple(int(np.searchsorted(row, threshold, side="right")) for row in values)
        return sum(caps) >= total_shards, caps

    @staticmethod
    def fed_lbap(matrix: CostMatrix, total_shards: int) -> Schedule:
        values = matrix.as_array()
        candidates = np.unique(values[np.isfinite(values)])
        if candidates.size == 0 or not LbapService.feasible_at(matrix, candidates[-1], total_shards)[0]:
            raise Infeasible(f"no threshold lets the cost matrix hold D={total_shards}")

        lo, hi = 0, candidates.size - 1
        while lo < hi:
            median = (lo + hi) // 2
            feasible, _ = LbapService.feasible_at(matrix, candidates[median], total_shards)
            if feasible:
                hi = median
            else:
                lo = median + 1

        threshold = float(candidates[lo])
        _, caps = LbapService.feasible_at(matrix, threshold, total_shards)
        assignment = list(caps)
        logger.debug(f"Threshold c*={threshold} gives caps {assignment}")

        # Shed the surplus from whichever device currently finishes last.
        surplus = sum(assignment) - total_shards
        while surplus > 0:
            straggler = max(
                (i for i, shards in enumerate(assignment) if shards > 0),
                key=lambda i: (matrix.cost(i, assignment[i]), -i),
            )
            assignment[straggler] -= 1
            surplus -= 1

        per_device = tuple(matrix.cost(i, shards) for i, shards in enumerate(assignment))
        makespan = max((cost for cost, shards in zip(per_device, assignment) if shards > 0), default=0.0)
        logger.info(f"Fed-LBAP assigned D={total_shards} over {matrix.n} devices, makespan={makespan:.6g}")
        return Schedule(
            scheduler="fed_lbap",
            assignment=tuple(assignment),
            makespan=makespan,
            per_device_cost=per_device,
        )

    @staticmethod
    def solve(profiles: Sequence[DeviceProfile], task: TrainingTask, s: Optional[int] = None) -> Schedule:
        matrix = LbapService.build_cost_matrix(profiles, task, s)
        return LbapService.fed_lbap(matrix, task.total_shards)

    @staticmethod
    def analytical_linear(profiles: Sequence[DeviceProfile], total_shards: int) -> AnalyticalSolution:
        """Relaxed equal-finish-time partition for linear devices, rounded to whole shards."""
        for profile in profiles:
            if not isinstance(profile.cost_model, LinearCost) or profile.cost_model.a <= 0:
                raise NonLinearProfile(f"{profile.label}: closed form needs a linear cost with a > 0")

        a = np.array([p.cost_model.a for p in profiles], dtype=float)
        b = np.array([p.cost_model.b + p.comm_up + p.comm_down for p in profiles], dtype=float)

        support = np.ones(len(profiles), dtype=bool)
        while True:
            optimal_time = (total_shards + np.sum(b[support] / a[support])) / np.sum(1.0 / a[support])
            relaxed = np.where(support, (optimal_time - b) / a, 0.0)
            negative = support & (relaxed < 0)
            if not negative.any():
                break
            logger.debug(f"Dropping devices {np.flatnonzero(negative).tolist()} with negative relaxed share")
            support &= ~negative

        assignment = np.floor(relaxed + 1e-9).astype(int)
        remaining = total_shards - int(assignment.sum())
        while remaining > 0:
            resulting = a * (assignment + 1) + b
            target = int(np.argmin(resulting))
            assignment[target] += 1
            remaining -= 1
        while remaining < 0:
            loaded = np.where(assignment > 0, a * assignment + b, -np.inf)
            target = int(np.argmax(loaded))
            assignment[target] -= 1
            remaining += 1

        schedule = cost_service.schedule_from_assignment("analytical", profiles, assignment.tolist())
        logger.info(
            f"Closed-form T*={optimal_time:.6g}, rounded makespan={schedule.makespan:.6g} "
            f"(gap bound {a.max():.6g})"
        )
        return AnalyticalSolution(
            optimal_time=float(optimal_time),
            relaxed=tuple(float(x) for x in relaxed),
            schedule=schedule,
        )

    @staticmethod
    def check_equal_finish(relaxed: Sequence[float], profiles: Sequence[DeviceProfile]) -> bool:
        """True when every loaded device finishes at the same relaxed time."""
        times = [
            p.cost_model.a * share + p.cost_model.b + p.comm_up + p.comm_down
            for p, share in zip(profiles, relaxed)
            if share > 0
        ]
        if len(times) <= 1:
            return True
        spread = max(times) - min(times)
        return spread <= settings.EQUAL_FINISH_RTOL * max(abs(t) for t in times)


lbap_service = LbapService()
