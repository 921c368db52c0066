import logging
from typing import Optional

from app.config.settings import settings
from app.exceptions import InvalidRunConfig
from app.models.device_model import DeviceProfile, LinearCost, TrainingTask
from app.models.profile_model import ArchSample

logger = logging.getLogger(__name__)

# Step-one coefficients (intercept s, s per conv param, s per dense param) at 10 shards.
DEVICE_COEFFICIENTS: dict[str, tuple[float, float, float]] = {
    "Nexus6": (578.0, 0.02, 2e-5),
    "Nexus6P": (647.0, 8e-3, 3e-4),
    "SJ8": (183.0, 1e-2, 9e-5),
    "Mate10": (47.0, 2e-3, 2e-5),
    "Pixel2": (68.0, 2e-3, 1e-5),
    "P30": (42.0, 2e-3, 1e-5),
}

COEFFICIENT_DATA_BATCHES = 10

# Handset counts per testbed, in DEVICE_COEFFICIENTS order.
FLEETS: dict[str, tuple[int, ...]] = {
    "T1": (1, 0, 0, 1, 1, 0),
    "T2": (2, 2, 0, 1, 1, 0),
    "T3": (4, 2, 0, 2, 2, 0),
    "T4": (6, 2, 1, 2, 2, 1),
    "T5": (8, 3, 2, 2, 3, 2),
}

HOMOGENEOUS_DEVICE = "Pixel2"
HOMOGENEOUS_SIZE = 10

DATASETS: dict[str, dict] = {
    "mnist": {"samples": 60000, "classes": 10, "alpha": "small"},
    "cifar10": {"samples": 50000, "classes": 10, "alpha": "large"},
}

SAMPLE_ARCHITECTURES: tuple[tuple[float, float], ...] = (
    (1e4, 1e5),
    (5e4, 2e6),
    (1e5, 1e6),
    (2e5, 5e5),
    (3e4, 3e6),
)

SAMPLE_DATA_BATCHES: tuple[int, ...] = (5, 10, 20, 40)


class PresetRepository:
    """Bundled handset fleets, dataset tasks and a synthetic profiling trace."""

    def __init__(
        self,
        conv_params: Optional[float] = None,
        dense_params: Optional[float] = None,
        reference_shards: Optional[int] = None,
        comm_seconds: Optional[float] = None,
    ):
        self.conv_params = conv_params if conv_params is not None else settings.PRESET_CONV_PARAMS
        self.dense_params = dense_params if dense_params is not None else settings.PRESET_DENSE_PARAMS
        self.reference_shards = reference_shards or settings.PRESET_REFERENCE_SHARDS
        self.comm_seconds = comm_seconds if comm_seconds is not None else settings.PRESET_COMM_SECONDS

    def handset_cost(self, handset: str) -> LinearCost:
        """Per-shard slope of a handset training the preset architecture."""
        intercept, conv, dense = DEVICE_COEFFICIENTS[handset]
        seconds = intercept + conv * self.conv_params + dense * self.dense_params
        return LinearCost(a=seconds / self.reference_shards, b=0.0)

    def _profiles(self, handsets: list[str]) -> list[DeviceProfile]:
        return [
            DeviceProfile(
                id=index,
                name=f"{handset}#{index}",
                cost_model=self.handset_cost(handset),
                comm_up=self.comm_seconds,
                comm_down=self.comm_seconds,
            )
            for index, handset in enumerate(handsets)
        ]

    def fleet(self, name: str) -> list[DeviceProfile]:
        if name == "homogeneous":
            return self._profiles([HOMOGENEOUS_DEVICE] * HOMOGENEOUS_SIZE)
        if name not in FLEETS:
            raise InvalidRunConfig(
                f"unknown preset {name!r}, expected one of {sorted(FLEETS) + ['homogeneous']}"
            )
        handsets = [
            handset
            for handset, count in zip(DEVICE_COEFFICIENTS, FLEETS[name])
            for _ in range(count)
        ]
        logger.debug(f"Preset {name}: {len(handsets)} devices")
        return self._profiles(handsets)

    def dataset_task(self, name: str, shard_size: Optional[int] = None) -> TrainingTask:
        if name not in DATASETS:
            raise InvalidRunConfig(f"unknown dataset {name!r}, expected one of {sorted(DATASETS)}")
        dataset = DATASETS[name]
        shard_size = shard_size or settings.SHARD_SIZE
        alpha = settings.ALPHA_SMALL_MODEL if dataset["alpha"] == "small" else settings.ALPHA_LARGE_MODEL
        return TrainingTask(
            total_shards=dataset["samples"] // shard_size,
            shard_size=shard_size,
            class_set=frozenset(range(dataset["classes"])),
            alpha=alpha,
        )

    def load(self, preset: str, dataset: str = "mnist") -> tuple[list[DeviceProfile], TrainingTask]:
        return self.fleet(preset), self.dataset_task(dataset)

    @staticmethod
    def sample_trace() -> list[ArchSample]:
        """Noiseless runs whose 10-shard plane is exactly the coefficient table."""
        samples = []
        for handset, (intercept, conv, dense) in DEVICE_COEFFICIENTS.items():
            for data_batches in SAMPLE_DATA_BATCHES:
                scale = data_batches / COEFFICIENT_DATA_BATCHES
                for conv_params, dense_params in SAMPLE_ARCHITECTURES:
                    samples.append(ArchSample(
                        device=handset,
                        conv_params=conv_params,
                        dense_params=dense_params,
                        data_batches=data_batches,
                        seconds=scale * (intercept + conv * conv_params + dense * dense_params),
                    ))
        return samples


preset_repository = PresetRepository()
