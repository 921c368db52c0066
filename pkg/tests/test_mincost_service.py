import logging

import numpy as np
import pytest

from app.exceptions import Infeasible, InvalidRunConfig, NotTwoDevices
from app.models import AccuracyWeights, DeviceProfile, LinearCost, TrainingTask
from app.services.mincost_service import mincost_service
from app.services.oracle_service import oracle_service

logger = logging.getLogger(__name__)


def fixed_weights(*costs):
    return AccuracyWeights(weights=tuple(0.0 for _ in costs), costs=tuple(costs), lowest_weight=0)


def test_weights_reproduce_single_and_five_class_users(linear_device, make_task):
    profiles = [
        linear_device(0, 1.0, classes={7}),
        linear_device(1, 1.0, classes={2, 5, 6, 8, 9}),
        linear_device(2, 1.0, classes={1, 3, 4, 7}),
    ]
    alpha = 1.8
    weights = mincost_service.accuracy_weights(profiles, make_task(10, alpha=alpha))
    assert weights.weights[0] == 9
    assert weights.weights[1] == 5
    assert weights.costs[0] == pytest.approx(alpha ** 9)
    assert weights.costs[1] == pytest.approx(alpha ** 5)


def test_full_coverage_user_has_unit_cost(linear_device, make_task):
    weights = mincost_service.accuracy_weights(
        [linear_device(0, 1.0), linear_device(1, 1.0, classes={1, 2})], make_task(10)
    )
    assert weights.weights[0] == 0
    assert weights.costs[0] == 1.0


def test_duplicate_sole_holders(linear_device, make_task):
    profiles = [
        linear_device(0, 1.0, classes={7}),
        linear_device(1, 1.0, classes={7}),
        linear_device(2, 1.0, classes={0, 1, 2, 3, 4, 5}),
    ]
    weights = mincost_service.accuracy_weights(profiles, make_task(10))
    assert weights.lowest_weight == 4
    assert weights.weights[:2] == (4, 9)


def test_population_view(linear_device, make_task):
    profiles = [linear_device(0, 1.0, classes={0, 1}), linear_device(1, 1.0, classes={1, 2, 3})]
    view = mincost_service.population_view(profiles, make_task(4, n_classes=4))
    assert view.populations == (frozenset({1, 2, 3}), frozenset({0, 1}))
    assert view.lowest_weight == 1


def test_greedy_hand_trace(linear_device, make_task):
    profiles = [linear_device(0, 1.0), linear_device(1, 3.0)]
    task = make_task(4, alpha=2.0)
    weights = mincost_service.accuracy_weights(profiles, task)
    result = mincost_service.mincost_schedule(profiles, task, weights, record_trace=True)

    assert result.schedule.assignment == (3, 1)
    assert [step.chosen for step in result.trace] == [0, 0, 0, 1]
    assert result.trace[2].candidates == (4.0, 4.0)
    assert result.schedule.total_cost == 8.0


def test_single_device_takes_everything(linear_device, make_task):
    result = mincost_service.solve([linear_device(0, 2.0, capacity=20)], make_task(12))
    assert result.schedule.assignment == (12,)


def test_prohibitive_outlier_excluded(linear_device, make_task):
    profiles = [linear_device(0, 0.1, classes={7}), linear_device(1, 1.0)]
    task = make_task(10, alpha=2.0)
    weights = mincost_service.accuracy_weights(profiles, task)
    assert weights.costs == (512.0, 1.0)

    greedy = mincost_service.mincost_schedule(profiles, task, weights).schedule
    assert greedy.assignment == (0, 10)
    optimum = oracle_service.oracle_mincost(profiles, weights, task)
    assert optimum.assignment == (0, 10)
    assert optimum.objective == pytest.approx(greedy.total_cost)


def test_capacity_closes_devices(linear_device, make_task):
    profiles = [linear_device(0, 1.0, capacity=2), linear_device(1, 5.0, capacity=10)]
    result = mincost_service.solve(profiles, make_task(6), alpha=1.0)
    assert result.schedule.assignment == (2, 4)

    with pytest.raises(Infeasible):
        mincost_service.solve([linear_device(0, 1.0, capacity=1), linear_device(1, 1.0, capacity=1)], make_task(3))


def test_closed_devices_drop_out_of_trace(linear_device, make_task):
    profiles = [linear_device(0, 1.0, capacity=1), linear_device(1, 2.0)]
    task = make_task(3)
    weights = mincost_service.accuracy_weights(profiles, task)
    trace = mincost_service.mincost_schedule(profiles, task, weights, record_trace=True).trace
    assert trace[0].chosen == 0
    assert all(step.candidates[0] is None for step in trace[1:])


def test_alternation_examples(linear_device):
    profiles = [linear_device(0, 1.0), linear_device(1, 1.0)]
    plan = mincost_service.alternation_check_linear(profiles, fixed_weights(1.0, 3.0), 6)
    assert plan.first_device == 0
    assert plan.phase_one_shards == 2
    assert plan.slope_ratio == 1
    assert plan.assignment == (4, 2)

    symmetric = mincost_service.alternation_check_linear(profiles, fixed_weights(1.0, 1.0), 7)
    assert symmetric.assignment == (4, 3)


def test_alternation_slope_ratio(linear_device):
    profiles = [linear_device(0, 2.0), linear_device(1, 1.0)]
    plan = mincost_service.alternation_check_linear(profiles, fixed_weights(1.0, 1.0), 300)
    assert plan.slope_ratio == 2
    first, second = plan.assignment
    assert second / first == pytest.approx(2.0, rel=0.05)


def test_alternation_needs_two_linear_devices(linear_device, table_device):
    with pytest.raises(NotTwoDevices):
        mincost_service.alternation_check_linear([linear_device(0, 1.0)], fixed_weights(1.0), 3)
    with pytest.raises(NotTwoDevices):
        mincost_service.alternation_check_linear(
            [linear_device(0, 1.0), table_device(1, [1.0, 2.0])], fixed_weights(1.0, 1.0), 2
        )


def test_greedy_matches_alternation_on_random_pairs():
    rng = np.random.default_rng(314)
    for _ in range(100):
        profiles = [
            DeviceProfile(
                id=i,
                cost_model=LinearCost(a=float(rng.integers(1, 9)) / 2, b=float(rng.integers(0, 4))),
                comm_up=float(rng.choice([0.0, 0.5])),
            )
            for i in range(2)
        ]
        weights = fixed_weights(*(float(rng.integers(0, 12)) for _ in range(2)))
        task = TrainingTask(total_shards=int(rng.integers(1, 120)))

        greedy = mincost_service.mincost_schedule(profiles, task, weights).schedule
        plan = mincost_service.alternation_check_linear(profiles, weights, task.total_shards)
        assert greedy.assignment == plan.assignment


def test_greedy_steps_are_argmin_and_bounded_by_oracle():
    rng = np.random.default_rng(2718)
    for _ in range(150):
        n = int(rng.integers(1, 5))
        profiles = []
        for i in range(n):
            size = int(rng.integers(1, 11))
            classes = {int(c) for c in rng.choice(10, size=size, replace=False)}
            profiles.append(DeviceProfile(
                id=i,
                cost_model=LinearCost(a=float(rng.uniform(0.2, 4.0)), b=float(rng.uniform(0.0, 2.0))),
                comm_up=float(rng.uniform(0.0, 1.0)),
                capacity=int(rng.integers(1, 13)),
                classes=frozenset(classes),
            ))
        total = int(rng.integers(1, sum(p.capacity for p in profiles) + 1))
        task = TrainingTask(total_shards=min(total, 12), alpha=float(rng.uniform(1.1, 2.5)))

        weights = mincost_service.accuracy_weights(profiles, task)
        result = mincost_service.mincost_schedule(profiles, task, weights, record_trace=True)
        schedule = result.schedule

        assert sum(schedule.assignment) == task.total_shards
        assert all(shards <= p.capacity for p, shards in zip(profiles, schedule.assignment))
        for step in result.trace:
            open_values = [v for v in step.candidates if v is not None]
            assert step.candidates[step.chosen] == min(open_values)
            assert step.chosen == step.candidates.index(min(open_values))

        optimum = oracle_service.oracle_mincost(profiles, weights, task)
        assert schedule.total_cost >= optimum.objective - 1e-9
        logger.info(f"greedy/optimal = {schedule.total_cost / optimum.objective:.4f}")


def test_raising_alpha_never_favours_the_highest_weight_device():
    rng = np.random.default_rng(1618)
    alphas = [1.0 + 0.1 * k for k in range(21)]
    for _ in range(30):
        n = int(rng.integers(2, 5))
        profiles = [
            DeviceProfile(
                id=i,
                cost_model=LinearCost(a=float(rng.uniform(0.2, 3.0))),
                classes=frozenset(int(c) for c in rng.choice(10, size=int(rng.integers(1, 11)), replace=False)),
            )
            for i in range(n)
        ]
        task = TrainingTask(total_shards=int(rng.integers(5, 40)))
        weights = mincost_service.accuracy_weights(profiles, task)
        heaviest = int(np.argmax(weights.weights))

        shards = [row.assignment[heaviest] for row in mincost_service.alpha_sweep(profiles, task, alphas)]
        assert all(later <= earlier for earlier, later in zip(shards, shards[1:]))


def test_steeper_slope_never_gains_shards(linear_device, make_task):
    task = make_task(40)
    baseline = mincost_service.solve([linear_device(0, 1.0), linear_device(1, 1.5)], task).schedule
    steeper = mincost_service.solve([linear_device(0, 1.0), linear_device(1, 3.0)], task).schedule
    assert steeper.assignment[1] <= baseline.assignment[1]


@pytest.mark.parametrize("alpha", [0.0, -2.0, float("inf")])
def test_non_positive_alpha_rejected(linear_device, make_task, alpha):
    profiles = [linear_device(0, 1.0, classes={1}), linear_device(1, 2.0)]
    with pytest.raises(InvalidRunConfig):
        mincost_service.accuracy_weights(profiles, make_task(4), alpha)
    with pytest.raises(InvalidRunConfig):
        mincost_service.alpha_sweep(profiles, make_task(4), [1.5, alpha])
