from app.repositories.preset_repository import PresetRepository, preset_repository
from app.repositories.scenario_repository import ScenarioRepository
from app.repositories.trace_repository import TraceRepository

__all__ = ["PresetRepository", "preset_repository", "ScenarioRepository", "TraceRepository"]
