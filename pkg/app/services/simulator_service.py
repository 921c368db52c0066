import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq, curve_fit

from app.exceptions import (
    DegenerateCurves,
    EmptyDeviceList,
    Infeasible,
    InputError,
    InvalidRunConfig,
    TooFewSamples,
    Unreachable,
)
from app.models.device_model import DeviceProfile, LinearCost, TrainingTask
from app.models.schedule_model import Schedule
from app.models.simulation_model import (
    BreakEven,
    CampaignReport,
    CampaignSpec,
    ConvergenceModel,
    EpochEstimate,
    IidMode,
    ProfilingGap,
    Scenario,
    ScenarioSpec,
    ScenarioUser,
    SchedulerOutcome,
)
from app.services.cost_service import cost_service
from app.services.lbap_service import lbap_service
from app.services.mincost_service import mincost_service

logger = logging.getLogger(__name__)

SCHEDULERS = ("fed_lbap", "mincost", "equal_split", "proportional", "random")

CROSSING_GRID_POINTS = 4097


def make_rng(seed: int) -> np.random.Generator:
    """The scenario and baseline generator: numpy PCG64, portable across platforms."""
    return np.random.Generator(np.random.PCG64(seed))


def largest_remainder(weights: Sequence[float], total: int) -> list[int]:
    """Integer apportionment of `total` in proportion to `weights`, ties to the lowest index."""
    weights = np.asarray(weights, dtype=float)
    quotas = weights / weights.sum() * total
    counts = np.floor(quotas).astype(int)
    order = np.argsort(-(quotas - counts), kind="stable")
    for index in order[: total - int(counts.sum())]:
        counts[index] += 1
    return counts.tolist()


def bounded_split(weights: Sequence[float], total: int, limits: Sequence[int]) -> list[int]:
    """Largest-remainder split of `total` where no share may exceed its limit.

    Shares that overflow are pinned at their limit and the rest is re-split
    among the devices that still have room.
    """
    if sum(limits) < total:
        raise Infeasible(f"devices hold at most {sum(limits)} shards, D={total}")

    assignment = [0] * len(limits)
    active = [i for i, limit in enumerate(limits) if limit > 0]
    remaining = total
    while remaining > 0:
        shares = largest_remainder([weights[i] for i in active], remaining)
        over = {i for i, share in zip(active, shares) if share > limits[i]}
        if not over:
            for i, share in zip(active, shares):
                assignment[i] = share
            break
        for i in over:
            assignment[i] = limits[i]
            remaining -= limits[i]
        active = [i for i in active if i not in over]
    return assignment


class SimulatorService:

    @staticmethod
    def generate_scenario(spec: ScenarioSpec) -> Scenario:
        rng = make_rng(spec.seed)
        mode = spec.mode
        users = []

        if isinstance(mode, IidMode):
            mean = spec.total_samples / spec.n_users
            if mode.imbalance_ratio > 0:
                draws = rng.normal(mean, mode.imbalance_ratio * mean, spec.n_users)
            else:
                draws = np.full(spec.n_users, mean)
            counts = largest_remainder(np.maximum(draws, 1.0), spec.total_samples)
            # Balanced classes; callers treat an IID user as holding every label.
            for samples in counts:
                users.append(ScenarioUser(samples=samples, classes=(), class_counts=()))
            coverage: tuple[int, ...] = ()
        else:
            counts = largest_remainder(np.ones(spec.n_users), spec.total_samples)
            for samples in counts:
                size = int(rng.integers(1, mode.max_classes + 1))
                classes = sorted(int(c) for c in rng.choice(mode.n_classes, size=size, replace=False))
                shares = rng.uniform(0.5, 1.5, size)
                users.append(ScenarioUser(
                    samples=samples,
                    classes=tuple(classes),
                    class_counts=tuple(largest_remainder(shares, samples)),
                ))
            coverage = tuple(sorted(set().union(*(u.classes for u in users))))

        logger.info(
            f"Generated {mode.kind} scenario: {spec.n_users} users, {spec.total_samples} samples, seed={spec.seed}"
        )
        return Scenario(spec=spec, users=tuple(users), coverage=coverage)

    @staticmethod
    def apply_scenario(
        profiles: Sequence[DeviceProfile],
        scenario: Scenario,
        shard_size: int,
    ) -> list[DeviceProfile]:
        if len(profiles) != len(scenario.users):
            raise InvalidRunConfig(
                f"scenario has {len(scenario.users)} users but the fleet has {len(profiles)} devices"
            )
        updated = []
        for profile, user in zip(profiles, scenario.users):
            changes = {"capacity": math.ceil(user.samples / shard_size)}
            changes["classes"] = frozenset(user.classes) if user.classes else None
            updated.append(profile.model_copy(update=changes))
        return updated

    @staticmethod
    def round_makespan(schedule: Schedule) -> float:
        return max(
            (cost for cost, shards in zip(schedule.per_device_cost, schedule.assignment) if shards > 0),
            default=0.0,
        )

    @staticmethod
    def epochs_to_accuracy(model: ConvergenceModel, target: float) -> EpochEstimate:
        if target >= model.A:
            raise Unreachable(f"target accuracy {target} is not below the asymptote A={model.A}")

        gap = model.A - target
        epochs = 0.0 if gap >= 1.0 else -math.log(gap) / model.beta
        return EpochEstimate(
            target=target,
            epochs=epochs,
            epochs_ceil=max(0, math.ceil(epochs - 1e-9)),
            total_time=model.k * epochs,
        )

    @staticmethod
    def _time_to(model: ConvergenceModel, target: float) -> float:
        gap = model.A - target
        return 0.0 if gap >= 1.0 else -model.k * math.log(gap) / model.beta

    @staticmethod
    def break_even_accuracy(first: ConvergenceModel, second: ConvergenceModel) -> BreakEven:
        """Break-even accuracy between two convergence curves.

        `bound` is the closed-form threshold; `crossings` are the exact accuracies in
        the jointly reachable range where both curves need the same wall-clock time.
        """
        exponent_first = first.beta * second.k
        exponent_second = second.beta * first.k
        if math.isclose(exponent_first, exponent_second, rel_tol=1e-15, abs_tol=0.0):
            raise DegenerateCurves(
                f"equal exponents beta1*k2 = beta2*k1 = {exponent_first:.6g}, no break-even point"
            )

        bound = second.A + (second.A - first.A) / math.expm1(exponent_first - exponent_second)

        lo = max(0.0, first.A - 1.0, second.A - 1.0)
        hi = min(first.A, second.A)

        def difference(p: float) -> float:
            return SimulatorService._time_to(first, p) - SimulatorService._time_to(second, p)

        crossings: list[float] = []
        if hi > lo:
            grid = lo + (hi - lo) * np.linspace(1e-9, 1.0 - 1e-9, CROSSING_GRID_POINTS)
            values = [difference(p) for p in grid]
            for left, right, f_left, f_right in zip(grid, grid[1:], values, values[1:]):
                if f_left == 0.0:
                    crossings.append(float(left))
                elif f_left * f_right < 0:
                    crossings.append(float(brentq(difference, left, right, xtol=1e-14, rtol=1e-14)))

        logger.debug(f"Break-even bound {bound:.6g}, crossings {crossings}")
        return BreakEven(bound=bound, crossings=tuple(crossings), reachable=(lo, hi))

    @staticmethod
    def fit_convergence(epochs: Sequence[float], accuracies: Sequence[float], k: float) -> ConvergenceModel:
        if len(epochs) != len(accuracies) or len(epochs) < 2:
            raise TooFewSamples("convergence fit needs at least two (epoch, accuracy) points")

        def curve(x, asymptote, beta):
            return asymptote - np.exp(-beta * x)

        x = np.asarray(epochs, dtype=float)
        y = np.asarray(accuracies, dtype=float)
        try:
            (asymptote, beta), _ = curve_fit(
                curve, x, y,
                p0=(min(max(float(y.max()), 1e-3), 1.0), 0.1),
                bounds=([1e-9, 1e-9], [1.0, np.inf]),
            )
        except RuntimeError as e:
            raise InputError(f"convergence fit did not converge: {e}")
        return ConvergenceModel(A=float(asymptote), beta=float(beta), k=k)

    @staticmethod
    def _table_limits(profiles: Sequence[DeviceProfile], task: TrainingTask) -> list[int]:
        return [cost_service.shard_limit(p, task.total_shards, use_capacity=False) for p in profiles]

    @staticmethod
    def equal_split(profiles: Sequence[DeviceProfile], task: TrainingTask) -> Schedule:
        limits = SimulatorService._table_limits(profiles, task)
        assignment = bounded_split([1.0] * len(profiles), task.total_shards, limits)
        return cost_service.schedule_from_assignment("equal_split", profiles, assignment)

    @staticmethod
    def proportional(profiles: Sequence[DeviceProfile], task: TrainingTask) -> Schedule:
        speeds = []
        for profile in profiles:
            model = profile.cost_model
            per_shard = model.a if isinstance(model, LinearCost) else model.costs[0]
            speeds.append(1.0 / per_shard if per_shard > 0 else 1.0)
        assignment = bounded_split(speeds, task.total_shards, SimulatorService._table_limits(profiles, task))
        return cost_service.schedule_from_assignment("proportional", profiles, assignment)

    @staticmethod
    def random_split(profiles: Sequence[DeviceProfile], task: TrainingTask, rng: np.random.Generator) -> Schedule:
        n, total = len(profiles), task.total_shards
        limits = SimulatorService._table_limits(profiles, task)
        if sum(limits) < total:
            raise Infeasible(f"devices hold at most {sum(limits)} shards, D={total}")
        if n == 1:
            assignment = [total]
        else:
            bars = np.sort(rng.choice(total + n - 1, size=n - 1, replace=False))
            edges = np.concatenate(([-1], bars, [total + n - 1]))
            assignment = (np.diff(edges) - 1).tolist()

        # Shards drawn past a cost table move one at a time to a random device with room.
        overflow = 0
        for i, limit in enumerate(limits):
            if assignment[i] > limit:
                overflow += assignment[i] - limit
                assignment[i] = limit
        while overflow:
            room = [i for i, limit in enumerate(limits) if assignment[i] < limit]
            assignment[room[int(rng.integers(len(room)))]] += 1
            overflow -= 1
        return cost_service.schedule_from_assignment("random", profiles, assignment)

    @staticmethod
    def run_scheduler(
        name: str,
        profiles: Sequence[DeviceProfile],
        task: TrainingTask,
        rng: Optional[np.random.Generator] = None,
    ) -> Schedule:
        if not profiles:
            raise EmptyDeviceList("at least one device is required")
        if name == "fed_lbap":
            return lbap_service.solve(profiles, task)
        if name == "analytical":
            return lbap_service.analytical_linear(profiles, task.total_shards).schedule
        if name == "mincost":
            return mincost_service.solve(profiles, task).schedule
        if name == "equal_split":
            return SimulatorService.equal_split(profiles, task)
        if name == "proportional":
            return SimulatorService.proportional(profiles, task)
        if name == "random":
            return SimulatorService.random_split(profiles, task, rng or make_rng(0))
        raise InvalidRunConfig(f"unknown scheduler {name!r}")

    @staticmethod
    def profiling_gap(
        true_profiles: Sequence[DeviceProfile],
        estimated_profiles: Sequence[DeviceProfile],
        task: TrainingTask,
        scheduler: str,
    ) -> ProfilingGap:
        """Round-time penalty of scheduling with estimated instead of measured costs."""
        if len(true_profiles) != len(estimated_profiles):
            raise InvalidRunConfig("estimated and true fleets differ in size")

        planned = SimulatorService.run_scheduler(scheduler, estimated_profiles, task)
        realized = cost_service.schedule_from_assignment(scheduler, true_profiles, planned.assignment)
        reference = SimulatorService.run_scheduler(scheduler, true_profiles, task)

        gap = (realized.makespan - reference.makespan) / reference.makespan if reference.makespan > 0 else 0.0
        logger.info(f"{scheduler}: profiling gap {gap:.2%} (realized {realized.makespan:.6g}s)")
        return ProfilingGap(
            scheduler=scheduler,
            estimated_makespan=planned.makespan,
            realized_makespan=realized.makespan,
            optimal_makespan=reference.makespan,
            relative_gap=gap,
        )

    @staticmethod
    def simulate_campaign(spec: CampaignSpec) -> CampaignReport:
        profiles = list(spec.devices)
        task = spec.task
        scenario = None

        if spec.scenario is not None:
            scenario = SimulatorService.generate_scenario(spec.scenario)
            profiles = SimulatorService.apply_scenario(profiles, scenario, task.shard_size)
            changes = {"total_shards": spec.scenario.total_samples // task.shard_size}
            if not isinstance(spec.scenario.mode, IidMode):
                changes["class_set"] = frozenset(range(spec.scenario.mode.n_classes))
            task = task.model_copy(update=changes)

        cost_service.validate_profiles(profiles, task)
        rng = make_rng(spec.seed)

        baseline = SimulatorService.equal_split(profiles, task).makespan
        outcomes = []
        models: dict[str, ConvergenceModel] = {}
        for name in spec.schedulers:
            schedule = SimulatorService.run_scheduler(name, profiles, task, rng)
            makespan = SimulatorService.round_makespan(schedule)

            convergence, estimates, unreachable = None, [], []
            params = spec.convergence.get(name)
            if params is not None and makespan > 0:
                convergence = ConvergenceModel(A=params.A, beta=params.beta, k=makespan)
                models[name] = convergence
                for target in spec.targets:
                    try:
                        estimates.append(SimulatorService.epochs_to_accuracy(convergence, target))
                    except Unreachable:
                        unreachable.append(target)

            outcomes.append(SchedulerOutcome(
                scheduler=name,
                schedule=schedule,
                round_makespan=makespan,
                speedup=baseline / makespan if makespan > 0 else None,
                convergence=convergence,
                targets=tuple(estimates),
                unreachable_targets=tuple(unreachable),
            ))
            logger.info(f"Campaign {name}: makespan={makespan:.6g}s, speedup={baseline / makespan if makespan else 0:.3g}x")

        break_even = None
        if "mincost" in models and "fed_lbap" in models:
            try:
                break_even = SimulatorService.break_even_accuracy(models["mincost"], models["fed_lbap"])
            except DegenerateCurves as e:
                logger.warning(f"No break-even point: {e.message}")

        gaps = []
        if spec.estimated_devices is not None:
            estimated = list(spec.estimated_devices)
            if scenario is not None:
                estimated = SimulatorService.apply_scenario(estimated, scenario, task.shard_size)
            for name in spec.schedulers:
                if name in ("fed_lbap", "mincost"):
                    gaps.append(SimulatorService.profiling_gap(profiles, estimated, task, name))

        return CampaignReport(
            seed=spec.seed,
            total_shards=task.total_shards,
            outcomes=tuple(outcomes),
            break_even=break_even,
            profiling_gaps=tuple(gaps),
            scenario=scenario,
        )


simulator_service = SimulatorService()
