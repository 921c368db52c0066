import logging
from pathlib import Path
from typing import Any, Optional, Union

from pydantic import ValidationError

from app.exceptions import InvalidRunConfig
from app.models.device_model import DeviceProfile, TrainingTask
from app.models.gradient_model import LayeredGradient
from app.models.simulation_model import CampaignSpec
from app.repositories.json_file import describe_validation_error, read_json
from app.repositories.preset_repository import PresetRepository, preset_repository

logger = logging.getLogger(__name__)

INSTANCE_KEYS = {"task", "devices"}
PRESET_KEYS = {"preset", "dataset"}


class ScenarioRepository:
    """Instance, campaign and gradient files.

    Instances are {"task": {...}, "devices": [...]} or {"preset": "T1".."T5"|"homogeneous",
    "dataset": "mnist"|"cifar10"}. Campaign files take the same two forms plus the
    campaign fields (schedulers, convergence, targets, seed, scenario, estimated_devices).
    """

    def __init__(self, path: Union[str, Path], presets: Optional[PresetRepository] = None):
        self.path = Path(path)
        self.presets = presets or preset_repository

    def _object(self) -> dict:
        data = read_json(self.path)
        if not isinstance(data, dict):
            raise InvalidRunConfig(f"{self.path}: expected a JSON object")
        return data

    def _invalid(self, error: ValidationError) -> InvalidRunConfig:
        return InvalidRunConfig(
            f"{self.path}: {describe_validation_error(error)}",
            details={"path": str(self.path)},
        )

    def _expand_preset(self, data: dict) -> dict:
        if "preset" not in data:
            return data
        if data.keys() & INSTANCE_KEYS:
            raise InvalidRunConfig(f"{self.path}: give either a preset or task/devices, not both")

        expanded = {key: value for key, value in data.items() if key not in PRESET_KEYS}
        devices, task = self.presets.load(data["preset"], data.get("dataset", "mnist"))
        expanded["devices"] = [device.model_dump() for device in devices]
        expanded["task"] = task.model_dump()
        return expanded

    def load_instance(self) -> tuple[list[DeviceProfile], TrainingTask]:
        data = self._expand_preset(self._object())
        unknown = data.keys() - INSTANCE_KEYS
        if unknown:
            raise InvalidRunConfig(f"{self.path}: unknown fields {sorted(unknown)}")
        if not INSTANCE_KEYS <= data.keys():
            raise InvalidRunConfig(f"{self.path}: instance needs both 'task' and 'devices'")

        try:
            task = TrainingTask.model_validate(data["task"])
            if not isinstance(data["devices"], list):
                raise InvalidRunConfig(f"{self.path}: 'devices' must be a list")
            devices = [DeviceProfile.model_validate(device) for device in data["devices"]]
        except ValidationError as e:
            raise self._invalid(e)

        logger.info(f"Loaded instance {self.path}: {len(devices)} devices, D={task.total_shards}")
        return devices, task

    def load_campaign(self) -> CampaignSpec:
        data = self._expand_preset(self._object())
        try:
            spec = CampaignSpec.model_validate(data)
        except ValidationError as e:
            raise self._invalid(e)
        logger.info(f"Loaded campaign {self.path}: {len(spec.devices)} devices, schedulers {list(spec.schedulers)}")
        return spec

    def load_gradients(self) -> tuple[list[LayeredGradient], Optional[LayeredGradient]]:
        """{"users": [layers, ...], "global": layers?}, each `layers` a list of float lists."""
        data = self._object()
        unknown = data.keys() - {"users", "global"}
        if unknown:
            raise InvalidRunConfig(f"{self.path}: unknown fields {sorted(unknown)}")
        if not isinstance(data.get("users"), list):
            raise InvalidRunConfig(f"{self.path}: 'users' must be a list of layered gradients")

        try:
            users = [self._gradient(layers) for layers in data["users"]]
            global_ = self._gradient(data["global"]) if data.get("global") is not None else None
        except ValidationError as e:
            raise self._invalid(e)
        return users, global_

    @staticmethod
    def _gradient(layers: Any) -> LayeredGradient:
        return LayeredGradient.model_validate({"layers": layers})
