import argparse
import logging
import math
from typing import Any

from pydantic import ValidationError

from app.config.settings import settings
from app.config.validator import parse_grid
from app.exceptions import InvalidRunConfig
from app.models.device_model import TrainingTask
from app.models.gradient_model import DiversityEntry
from app.repositories import ScenarioRepository, TraceRepository, preset_repository
from app.repositories.json_file import describe_validation_error
from app.services.cost_service import cost_service
from app.services.diversity_service import diversity_service
from app.services.lbap_service import lbap_service
from app.services.mincost_service import mincost_service
from app.services.oracle_service import oracle_service
from app.services.profiler_service import profiler_service
from app.services.simulator_service import make_rng, simulator_service

logger = logging.getLogger(__name__)

Result = tuple[Any, list[dict]]


def _seed(args: argparse.Namespace) -> int:
    seed = getattr(args, "seed", None)
    if seed is None:
        return settings.DEFAULT_SEED
    if seed < 0:
        raise InvalidRunConfig(f"--seed must be >= 0, got {seed}")
    return seed


def _with_alpha(task: TrainingTask, alpha: float) -> TrainingTask:
    try:
        return TrainingTask.model_validate({**task.model_dump(), "alpha": alpha})
    except ValidationError as e:
        raise InvalidRunConfig(f"--alpha: {describe_validation_error(e)}")


def _device_rows(profiles, schedule) -> list[dict]:
    return [
        {"device": p.id, "name": p.label, "shards": shards, "cost": cost}
        for p, shards, cost in zip(profiles, schedule.assignment, schedule.per_device_cost)
    ]


def cmd_profile(args: argparse.Namespace) -> Result:
    if args.preset == "sample":
        samples = preset_repository.sample_trace()
        source = "sample"
    elif args.trace:
        samples = TraceRepository(args.trace).load_samples()
        source = str(args.trace)
    else:
        raise InvalidRunConfig("profile needs a trace file or --preset sample")

    conv = settings.PROFILE_TARGET_CONV if args.conv is None else args.conv
    dense = settings.PROFILE_TARGET_DENSE if args.dense is None else args.dense

    devices, rows = [], []
    for step_one, fitted in profiler_service.profile_devices(samples, conv, dense):
        devices.append({
            "device": fitted.device,
            "a": fitted.a,
            "b": fitted.b,
            "cost_model": fitted.cost_model,
            "step_two_rmse": fitted.step_two_rmse,
            "step_one": [
                {
                    "data_batches": fit.data_batches,
                    "coefficients": [fit.intercept, fit.conv, fit.dense],
                    "rmse": fit.rmse,
                    "predicted_seconds": fit.predict(conv, dense),
                }
                for fit in step_one.fits
            ],
        })
        rows.append({
            "device": fitted.device,
            "a": fitted.a,
            "b": fitted.b,
            "step_one_rmse": max(fitted.step_one_rmse),
            "step_two_rmse": fitted.step_two_rmse,
        })

    logger.info(f"Profiled {len(devices)} devices from {source}")
    payload = {"source": source, "target": {"conv_params": conv, "dense_params": dense}, "devices": devices}
    return payload, rows


def _verify(scheduler: str, profiles, task, schedule, weights) -> dict:
    if scheduler == "mincost":
        optimum = oracle_service.oracle_mincost(profiles, weights, task)
        ratio = schedule.total_cost / optimum.objective if optimum.objective > 0 else 1.0
        logger.info(f"Greedy/optimal total cost ratio {ratio:.6g}")
        return {
            "objective": "total_cost",
            "oracle_value": optimum.objective,
            "oracle_assignment": optimum.assignment,
            "ratio": ratio,
            "matches": math.isclose(schedule.total_cost, optimum.objective, rel_tol=1e-9),
        }

    matrix = lbap_service.build_cost_matrix(profiles, task)
    optimum = oracle_service.oracle_minmax(matrix, task.total_shards)
    return {
        "objective": "makespan",
        "oracle_value": optimum.objective,
        "oracle_assignment": optimum.assignment,
        "ratio": schedule.makespan / optimum.objective if optimum.objective > 0 else 1.0,
        "matches": schedule.makespan == optimum.objective,
    }


def cmd_schedule(args: argparse.Namespace) -> Result:
    profiles, task = ScenarioRepository(args.scenario).load_instance()
    if args.alpha is not None:
        task = _with_alpha(task, args.alpha)
    cost_service.validate_profiles(profiles, task)

    if args.alpha_grid:
        try:
            alphas = parse_grid(args.alpha_grid, "--alpha-grid", positive=True)
        except ValueError as e:
            raise InvalidRunConfig(str(e))
        sweep = mincost_service.alpha_sweep(profiles, task, alphas)
        rows = [
            {"alpha": row.alpha, **{f"d{p.id}": shards for p, shards in zip(profiles, row.assignment)},
             "total_cost": row.total_cost, "makespan": row.makespan}
            for row in sweep
        ]
        return {"total_shards": task.total_shards, "alpha_sweep": sweep}, rows

    scheduler = args.scheduler or ("mincost" if args.mode == "noniid" else "fed_lbap")
    payload: dict[str, Any] = {"scheduler": scheduler, "total_shards": task.total_shards}
    weights = None

    if scheduler == "mincost":
        weights = mincost_service.accuracy_weights(profiles, task)
        schedule = mincost_service.mincost_schedule(profiles, task, weights).schedule
        payload["alpha"] = task.alpha
        payload["weights"] = weights.weights
    elif scheduler == "analytical":
        solution = lbap_service.analytical_linear(profiles, task.total_shards)
        schedule = solution.schedule
        payload["optimal_time"] = solution.optimal_time
        payload["relaxed"] = solution.relaxed
        payload["integral_gap"] = solution.integral_gap
    else:
        schedule = simulator_service.run_scheduler(scheduler, profiles, task, make_rng(_seed(args)))

    payload["schedule"] = schedule
    if args.verify:
        payload["verify"] = _verify(scheduler, profiles, task, schedule, weights)

    return payload, _device_rows(profiles, schedule)


def cmd_simulate(args: argparse.Namespace) -> Result:
    spec = ScenarioRepository(args.campaign).load_campaign()
    if args.seed is not None:
        spec = spec.model_copy(update={"seed": _seed(args)})

    report = simulator_service.simulate_campaign(spec)
    rows = []
    for outcome in report.outcomes:
        row = {
            "scheduler": outcome.scheduler,
            "makespan": outcome.round_makespan,
            "speedup": outcome.speedup,
        }
        for estimate in outcome.targets:
            row[f"time@{estimate.target:g}"] = estimate.total_time
        rows.append(row)
    return report, rows


def cmd_diversity(args: argparse.Namespace) -> Result:
    users, global_ = ScenarioRepository(args.gradients).load_gradients()

    if global_ is not None:
        entries = [
            DiversityEntry(user=index, diversity=diversity_service.gradient_diversity(user, global_))
            for index, user in enumerate(users)
        ]
        reference = "global"
    else:
        entries = diversity_service.diversity_rank(users)
        reference = "leave_one_out"

    rows = [entry.model_dump() for entry in entries]
    return {"reference": reference, "users": entries}, rows


def cmd_oracle(args: argparse.Namespace) -> Result:
    profiles, task = ScenarioRepository(args.scenario).load_instance()
    if args.alpha is not None:
        task = _with_alpha(task, args.alpha)
    cost_service.validate_profiles(profiles, task)

    if args.mode == "noniid":
        weights = mincost_service.accuracy_weights(profiles, task)
        solution = oracle_service.oracle_mincost(profiles, weights, task)
        objective = "total_cost"
    else:
        matrix = lbap_service.build_cost_matrix(profiles, task)
        solution = oracle_service.oracle_minmax(matrix, task.total_shards)
        objective = "makespan"

    payload = {"mode": args.mode, "objective": objective, **solution.model_dump()}
    rows = [{"device": p.id, "name": p.label, "shards": shards} for p, shards in zip(profiles, solution.assignment)]
    return payload, rows


COMMANDS = {
    "profile": cmd_profile,
    "schedule": cmd_schedule,
    "simulate": cmd_simulate,
    "diversity": cmd_diversity,
    "oracle": cmd_oracle,
}
