import bisect
import logging
import math
from typing import Optional, Sequence

from app.exceptions import Infeasible, InvalidRunConfig, NotTwoDevices
from app.models.device_model import DeviceProfile, LinearCost, TrainingTask
from app.models.schedule_model import (
    AccuracyWeights,
    AlphaSweepRow,
    AlternationPlan,
    GreedyResult,
    GreedyStep,
    PopulationView,
)
from app.services.cost_service import cost_service

logger = logging.getLogger(__name__)


class MinCostService:
    """Accuracy-aware greedy assignment for non-IID populations."""

    @staticmethod
    def population_view(profiles: Sequence[DeviceProfile], task: TrainingTask) -> PopulationView:
        class_sets = [cost_service.class_set_of(p, task) for p in profiles]
        populations = []
        for i in range(len(class_sets)):
            others = frozenset().union(*(c for j, c in enumerate(class_sets) if j != i))
            populations.append(others)
        lowest = len(task.class_set) - max(len(c) for c in class_sets)
        return PopulationView(populations=tuple(populations), lowest_weight=lowest)

    @staticmethod
    def accuracy_weights(
        profiles: Sequence[DeviceProfile],
        task: TrainingTask,
        alpha: Optional[float] = None,
    ) -> AccuracyWeights:
        alpha = task.alpha if alpha is None else alpha
        if not (math.isfinite(alpha) and alpha > 0):
            raise InvalidRunConfig(f"alpha must be a positive finite number, got {alpha}")
        class_sets = [cost_service.class_set_of(p, task) for p in profiles]
        n_classes = len(task.class_set)
        lowest = MinCostService.population_view(profiles, task).lowest_weight

        weights = []
        for i, classes in enumerate(class_sets):
            # Holders of an identical class set count as one contributor.
            rest = frozenset().union(*(c for c in class_sets if c != classes))
            first_holder = class_sets.index(classes) == i
            if classes and not classes & rest and first_holder:
                weights.append(lowest)
            else:
                weights.append(len(task.class_set - classes))

        costs = tuple(alpha ** w for w in weights)
        logger.debug(f"Accuracy weights {weights} (w_l={lowest}, |C|={n_classes}, alpha={alpha})")
        return AccuracyWeights(weights=tuple(float(w) for w in weights), costs=costs, lowest_weight=lowest)

    @staticmethod
    def mincost_schedule(
        profiles: Sequence[DeviceProfile],
        task: TrainingTask,
        weights: AccuracyWeights,
        record_trace: bool = False,
    ) -> GreedyResult:
        total = task.total_shards
        limits = [cost_service.shard_limit(p, total) for p in profiles]
        if sum(limits) < total:
            raise Infeasible(f"device capacities sum to {sum(limits)} shards, need D={total}")

        loads = [0] * len(profiles)
        closed = [limit <= 0 for limit in limits]
        trace = []

        for step in range(total):
            candidates: list[Optional[float]] = [
                None if closed[i] else cost_service.cost_of(p, loads[i] + 1) + weights.costs[i]
                for i, p in enumerate(profiles)
            ]
            open_values = [(value, i) for i, value in enumerate(candidates) if value is not None]
            if not open_values:
                raise Infeasible(f"capacity exhausted after {step} of {total} shards")

            _, chosen = min(open_values)
            loads[chosen] += 1
            if loads[chosen] >= limits[chosen]:
                closed[chosen] = True
                logger.debug(f"Device {chosen} closed at {loads[chosen]} shards")
            if record_trace:
                trace.append(GreedyStep(step=step, chosen=chosen, candidates=tuple(candidates)))

        total_cost = sum(
            cost_service.cost_of(p, shards) + weights.costs[i]
            for i, (p, shards) in enumerate(zip(profiles, loads))
            if shards > 0
        )
        schedule = cost_service.schedule_from_assignment("mincost", profiles, loads, total_cost=total_cost)
        logger.info(
            f"MinCost assigned D={total} to {len(schedule.participants)}/{len(profiles)} devices, "
            f"total cost={total_cost:.6g}, makespan={schedule.makespan:.6g}"
        )
        return GreedyResult(schedule=schedule, trace=tuple(trace))

    @staticmethod
    def solve(profiles: Sequence[DeviceProfile], task: TrainingTask, alpha: Optional[float] = None) -> GreedyResult:
        weights = MinCostService.accuracy_weights(profiles, task, alpha)
        return MinCostService.mincost_schedule(profiles, task, weights)

    @staticmethod
    def alternation_check_linear(
        profiles: Sequence[DeviceProfile],
        weights: AccuracyWeights,
        total_shards: int,
    ) -> AlternationPlan:
        """Closed-form split of the greedy between two linear devices.

        The greedy walks two increasing cost sequences in merge order, so device 0
        keeps its j-th shard exactly when j plus the number of device-1 steps that
        are strictly cheaper stays within D.

        Only that merge count sets `assignment`. `first_device`, `phase_one_shards`
        and `slope_ratio` describe the shape of the walk (the lead device's opening
        run, then roughly one shard on the steep device per `slope_ratio` on the
        shallow one) and are reported for inspection.
        """
        if len(profiles) != 2:
            raise NotTwoDevices(f"alternation needs exactly two devices, got {len(profiles)}")
        for profile in profiles:
            if not isinstance(profile.cost_model, LinearCost):
                raise NotTwoDevices(f"{profile.label}: alternation needs linear cost models")

        first, second = profiles

        def step_cost(index: int, shards: int) -> float:
            return cost_service.cost_of(profiles[index], shards) + weights.costs[index]

        def cheaper_second_steps(value: float) -> int:
            model = second.cost_model
            offset = step_cost(1, 1) - model.a
            guess = math.floor((value - offset) / model.a) if math.isfinite(value) else total_shards
            count = min(max(guess, 0), total_shards)
            while count < total_shards and step_cost(1, count + 1) < value:
                count += 1
            while count > 0 and step_cost(1, count) >= value:
                count -= 1
            return count

        position = range(1, total_shards + 1)
        kept = bisect.bisect_right(position, total_shards, key=lambda j: j + cheaper_second_steps(step_cost(0, j)))

        limits = [cost_service.shard_limit(p, total_shards) for p in profiles]
        kept = min(kept, limits[0])
        if total_shards - kept > limits[1]:
            kept = total_shards - limits[1]

        lead = 0 if step_cost(0, 1) <= step_cost(1, 1) else 1
        trail = 1 - lead
        lead_shards = 0
        while lead_shards < total_shards and step_cost(lead, lead_shards + 1) < step_cost(trail, 1):
            lead_shards += 1

        slopes = sorted((first.cost_model.a, second.cost_model.a))
        ratio = int(slopes[1] // slopes[0])
        logger.debug(f"Phase one: device {lead} takes {lead_shards} shards, then alternate at {ratio}:1")
        return AlternationPlan(
            first_device=lead,
            phase_one_shards=lead_shards,
            slope_ratio=ratio,
            assignment=(kept, total_shards - kept),
        )

    @staticmethod
    def alpha_sweep(
        profiles: Sequence[DeviceProfile],
        task: TrainingTask,
        alphas: Sequence[float],
    ) -> list[AlphaSweepRow]:
        rows = []
        for alpha in alphas:
            result = MinCostService.solve(profiles, task, alpha)
            rows.append(AlphaSweepRow(
                alpha=alpha,
                assignment=result.schedule.assignment,
                total_cost=result.schedule.total_cost,
                makespan=result.schedule.makespan,
            ))
        return rows


mincost_service = MinCostService()
