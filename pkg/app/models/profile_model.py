from pydantic import BaseModel, ConfigDict, Field

from app.models.device_model import LinearCost


class ArchSample(BaseModel):
    """One measured training run of a network architecture on a device."""

    model_config = ConfigDict(frozen=True)

    device: str = "device"
    conv_params: float = Field(ge=0)
    dense_params: float = Field(ge=0)
    data_batches: int = Field(ge=0, description="Data size of the run, in shards")
    seconds: float = Field(ge=0, allow_inf_nan=False)


class StepOneFit(BaseModel):
    model_config = ConfigDict(frozen=True)

    data_batches: int
    intercept: float
    conv: float
    dense: float
    rmse: float
    samples: int

    def predict(self, conv_params: float, dense_params: float) -> float:
        return self.intercept + self.conv * conv_params + self.dense * dense_params


class StepOneModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    device: str = "device"
    fits: tuple[StepOneFit, ...]


class FittedDevice(BaseModel):
    model_config = ConfigDict(frozen=True)

    device: str = "device"
    a: float
    b: float
    step_one_rmse: tuple[float, ...]
    step_two_rmse: float

    @property
    def cost_model(self) -> LinearCost:
        return LinearCost(a=self.a, b=max(self.b, 0.0))
