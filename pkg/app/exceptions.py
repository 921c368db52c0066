from typing import Optional


class FedSchedError(Exception):
    code: str = "internal_error"
    exit_code: int = 4

    def __init__(self, message: str, *, details: Optional[dict] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> dict:
        payload = {"code": self.code, "message": self.message}
        if self.details:
            payload["details"] = self.details
        return payload


class InputError(FedSchedError):
    code = "invalid_input"
    exit_code = 2


class Infeasible(FedSchedError):
    code = "infeasible"
    exit_code = 3


class NonMonotoneCost(InputError):
    code = "non_monotone_cost"


class NegativeLatency(InputError):
    code = "negative_latency"


class EmptyDeviceList(InputError):
    code = "empty_device_list"


class ZeroShards(InputError):
    code = "zero_shards"


class NonPositiveSlope(InputError):
    code = "non_positive_slope"


class InvalidCapacity(InputError):
    code = "invalid_capacity"


class UnknownClass(InputError):
    code = "unknown_class"


class ShardsOutOfRange(InputError):
    code = "shards_out_of_range"


class ShapeMismatch(InputError):
    code = "shape_mismatch"


class RankDeficient(InputError):
    code = "rank_deficient"


class TooFewSamples(InputError):
    code = "too_few_samples"


class SingleDataSize(InputError):
    code = "single_data_size"


class NonLinearProfile(InputError):
    code = "non_linear_profile"


class NotTwoDevices(InputError):
    code = "not_two_devices"


class TooFewUsers(InputError):
    code = "too_few_users"


class DegenerateDenominator(InputError):
    code = "degenerate_denominator"


class DegenerateCurves(InputError):
    code = "degenerate_curves"


class Unreachable(InputError):
    code = "unreachable"


class TooLarge(InputError):
    code = "too_large"


class TraceParseError(InputError):
    code = "parse_error"


class InvalidRunConfig(InputError):
    code = "invalid_run_config"
