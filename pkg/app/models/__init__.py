from app.models.device_model import CostModel, DeviceProfile, LinearCost, TableCost, TrainingTask
from app.models.schedule_model import (
    AccuracyWeights,
    AlphaSweepRow,
    AlternationPlan,
    AnalyticalSolution,
    CostMatrix,
    GreedyResult,
    GreedyStep,
    OracleSolution,
    PopulationView,
    Schedule,
)
from app.models.profile_model import ArchSample, FittedDevice, StepOneFit, StepOneModel
from app.models.gradient_model import DiversityEntry, LayeredGradient
from app.models.simulation_model import (
    BreakEven,
    CampaignReport,
    CampaignSpec,
    ConvergenceModel,
    ConvergenceParams,
    EpochEstimate,
    IidMode,
    NonIidMode,
    ProfilingGap,
    Scenario,
    ScenarioSpec,
    ScenarioUser,
    SchedulerOutcome,
)

__all__ = [
    "AccuracyWeights",
    "AlphaSweepRow",
    "AlternationPlan",
    "AnalyticalSolution",
    "ArchSample",
    "BreakEven",
    "CampaignReport",
    "CampaignSpec",
    "ConvergenceModel",
    "ConvergenceParams",
    "CostMatrix",
    "CostModel",
    "DeviceProfile",
    "DiversityEntry",
    "EpochEstimate",
    "FittedDevice",
    "GreedyResult",
    "GreedyStep",
    "IidMode",
    "LayeredGradient",
    "LinearCost",
    "NonIidMode",
    "OracleSolution",
    "PopulationView",
    "ProfilingGap",
    "Scenario",
    "ScenarioSpec",
    "ScenarioUser",
    "Schedule",
    "SchedulerOutcome",
    "StepOneFit",
    "StepOneModel",
    "TableCost",
    "TrainingTask",
]
