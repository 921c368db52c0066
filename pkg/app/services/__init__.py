from .cost_service import CostService, cost_service
from .diversity_service import DiversityService, diversity_service
from .lbap_service import LbapService, lbap_service
from .mincost_service import MinCostService, mincost_service
from .oracle_service import OracleService, oracle_service
from .profiler_service import ProfilerService, profiler_service
from .report_service import ReportService, report_service
from .simulator_service import SimulatorService, simulator_service

__all__ = [
    "CostService", "cost_service",
    "DiversityService", "diversity_service",
    "LbapService", "lbap_service",
    "MinCostService", "mincost_service",
    "OracleService", "oracle_service",
    "ProfilerService", "profiler_service",
    "ReportService", "report_service",
    "SimulatorService", "simulator_service",
]
