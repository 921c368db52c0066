import pytest

from app.models import DeviceProfile, LinearCost, TableCost, TrainingTask


@pytest.fixture
def linear_device():
    def make(id, a, b=0.0, comm_up=0.0, comm_down=0.0, capacity=None, classes=None):
        return DeviceProfile(
            id=id,
            cost_model=LinearCost(a=a, b=b),
            comm_up=comm_up,
            comm_down=comm_down,
            capacity=capacity,
            classes=None if classes is None else frozenset(classes),
        )
    return make


@pytest.fixture
def table_device():
    def make(id, costs, comm_up=0.0, comm_down=0.0, capacity=None, classes=None):
        return DeviceProfile(
            id=id,
            cost_model=TableCost(costs=tuple(costs)),
            comm_up=comm_up,
            comm_down=comm_down,
            capacity=capacity,
            classes=None if classes is None else frozenset(classes),
        )
    return make


@pytest.fixture
def make_task():
    def make(total_shards, n_classes=10, alpha=2.0):
        return TrainingTask(total_shards=total_shards, class_set=frozenset(range(n_classes)), alpha=alpha)
    return make
