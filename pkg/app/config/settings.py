from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field, field_validator

from dotenv import load_dotenv

from .validator import validate_json_list

load_dotenv()


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        extra='ignore',
        env_file='.env',
        env_file_encoding='utf-8',
        case_sensitive=True
    )
    APP_NAME: str = "fedsched"
    APP_DESCRIPTION: str = "Workload scheduling for federated learning on heterogeneous mobile devices"

    LOG_LEVEL: str = Field(
        default="INFO",
        description="Root log level"
    )
    DEFAULT_SEED: int = Field(
        default=0,
        description="Seed used when --seed is not given"
    )

    SHARD_SIZE: int = Field(
        default=100,
        description="Samples per data shard"
    )
    ALPHA_SMALL_MODEL: float = Field(
        default=1.8,
        description="Accuracy-cost base for small networks"
    )
    ALPHA_LARGE_MODEL: float = Field(
        default=2.45,
        description="Accuracy-cost base for large networks"
    )

    ORACLE_MAX_USERS: int = Field(
        default=4,
        description="Largest device count the brute-force oracle accepts"
    )
    ORACLE_MAX_SHARDS: int = Field(
        default=12,
        description="Largest per-device shard count the brute-force oracle accepts"
    )
    ORACLE_MAX_ENUMERATION: int = Field(
        default=10 ** 7,
        description="Upper bound on the number of enumerated compositions"
    )

    PROFILER_MIN_SAMPLES: int = Field(
        default=3,
        description="Minimum samples per data size for the first regression step"
    )
    PROFILER_CONDITION_WARNING: float = Field(
        default=1e12,
        description="Condition number above which the normal equations are reported as ill-conditioned"
    )

    EQUAL_FINISH_RTOL: float = Field(
        default=1e-9,
        description="Relative tolerance for the equal-finish-time check"
    )
    DIVERSITY_DEGENERACY_EPS: float = Field(
        default=1e-12,
        description="Relative threshold below which the diversity denominator is degenerate"
    )

    OUTPUT_SIGNIFICANT_DIGITS: int = Field(
        default=9,
        description="Significant digits for floats in JSON reports"
    )

    N_CLASSES: int = Field(
        default=10,
        description="Default number of class labels"
    )
    NON_IID_MAX_CLASSES: int = Field(
        default=7,
        description="Default largest class subset per user in non-IID scenarios"
    )
    TARGET_ACCURACIES: list[float] = Field(
        default=[0.5, 0.7, 0.9],
        description="Accuracy targets reported by campaigns"
    )

    @field_validator('TARGET_ACCURACIES', mode='before')
    def parse_target_accuracies(cls, v):
        return validate_json_list(v, field_name="TARGET_ACCURACIES")

    PRESET_CONV_PARAMS: float = Field(
        default=5e4,
        description="Convolutional parameter count of the reference network for preset fleets"
    )
    PRESET_DENSE_PARAMS: float = Field(
        default=2e6,
        description="Dense parameter count of the reference network for preset fleets"
    )
    PRESET_REFERENCE_SHARDS: int = Field(
        default=30,
        description="Shards covered by one profiled training pass in preset fleets"
    )
    PRESET_COMM_SECONDS: float = Field(
        default=1.0,
        description="Uplink and downlink latency of preset devices, each"
    )

    PROFILE_TARGET_CONV: float = Field(
        default=1e5,
        description="Default convolutional parameter count for step-two profiling"
    )
    PROFILE_TARGET_DENSE: float = Field(
        default=1e6,
        description="Default dense parameter count for step-two profiling"
    )


settings = Settings()
