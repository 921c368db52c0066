import logging
from collections import defaultdict
from typing import Sequence

import numpy as np

from app.config.settings import settings
from app.exceptions import NonPositiveSlope, RankDeficient, SingleDataSize, TooFewSamples
from app.models.profile_model import ArchSample, FittedDevice, StepOneFit, StepOneModel

logger = logging.getLogger(__name__)


class ProfilerService:
    """Two-step regression from measured training runs to per-shard cost models.

    Step one regresses time on (conv, dense) parameter counts separately for each
    profiled data size. Step two evaluates those planes at a target architecture
    and fits a line through the predictions as a function of data size.
    """

    @staticmethod
    def _solve_normal_equations(design: np.ndarray, target: np.ndarray, label: str) -> np.ndarray:
        # Column scaling keeps raw parameter counts from swamping the intercept.
        scale = np.linalg.norm(design, axis=0)
        scale[scale == 0] = 1.0
        scaled = design / scale

        if np.linalg.matrix_rank(scaled) < design.shape[1]:
            raise RankDeficient(f"{label}: design matrix is rank deficient (collinear samples)")

        gram = scaled.T @ scaled
        condition = np.linalg.cond(gram)
        if condition > settings.PROFILER_CONDITION_WARNING:
            logger.warning(f"{label}: normal equations are ill-conditioned (cond={condition:.3g})")

        # LAPACK gesv: LU with partial pivoting.
        solution = np.linalg.solve(gram, scaled.T @ target)
        return solution / scale

    @staticmethod
    def fit_step_one(samples: Sequence[ArchSample]) -> StepOneModel:
        if not samples:
            raise TooFewSamples("no samples to fit")

        device = samples[0].device
        groups: dict[int, list[ArchSample]] = defaultdict(list)
        for sample in samples:
            groups[sample.data_batches].append(sample)

        fits = []
        for data_batches in sorted(groups):
            group = groups[data_batches]
            if len(group) < settings.PROFILER_MIN_SAMPLES:
                raise TooFewSamples(
                    f"{device}: data size {data_batches} has {len(group)} samples, "
                    f"need {settings.PROFILER_MIN_SAMPLES}",
                    details={"device": device, "data_batches": data_batches},
                )

            design = np.array([[1.0, s.conv_params, s.dense_params] for s in group])
            target = np.array([s.seconds for s in group])
            intercept, conv, dense = ProfilerService._solve_normal_equations(
                design, target, f"{device} d={data_batches}"
            )

            residuals = target - design @ np.array([intercept, conv, dense])
            rmse = float(np.sqrt(np.mean(residuals ** 2)))
            fits.append(StepOneFit(
                data_batches=data_batches,
                intercept=float(intercept),
                conv=float(conv),
                dense=float(dense),
                rmse=rmse,
                samples=len(group),
            ))
            logger.debug(
                f"{device} d={data_batches}: alpha=({intercept:.6g}, {conv:.6g}, {dense:.6g}), rmse={rmse:.3g}"
            )

        return StepOneModel(device=device, fits=tuple(fits))

    @staticmethod
    def fit_step_two(step_one: StepOneModel, conv_params: float, dense_params: float) -> FittedDevice:
        if len(step_one.fits) < 2:
            raise SingleDataSize(
                f"{step_one.device}: need at least two data sizes to fit a slope, got {len(step_one.fits)}"
            )

        sizes = np.array([fit.data_batches for fit in step_one.fits], dtype=float)
        predicted = np.array([fit.predict(conv_params, dense_params) for fit in step_one.fits])

        slope, intercept = np.polyfit(sizes, predicted, 1)
        residuals = predicted - (slope * sizes + intercept)
        rmse = float(np.sqrt(np.mean(residuals ** 2)))

        # Flat traces come back from lstsq with round-off sized slopes.
        if slope <= 1e-12 * max(float(np.max(np.abs(predicted))), 1.0):
            raise NonPositiveSlope(
                f"{step_one.device}: fitted slope a={slope:.6g} is not positive, model rejected",
                details={"device": step_one.device},
            )
        if intercept < 0:
            logger.warning(f"{step_one.device}: negative intercept b={intercept:.6g} clamped to 0 in the cost model")

        logger.info(f"Profiled {step_one.device}: a={slope:.6g} s/shard, b={intercept:.6g} s, rmse={rmse:.3g}")
        return FittedDevice(
            device=step_one.device,
            a=float(slope),
            b=float(intercept),
            step_one_rmse=tuple(fit.rmse for fit in step_one.fits),
            step_two_rmse=rmse,
        )

    @staticmethod
    def predict_time(device: FittedDevice, shards: int) -> float:
        if shards <= 0:
            return 0.0
        return device.a * shards + device.b

    @staticmethod
    def profile_devices(
        samples: Sequence[ArchSample],
        conv_params: float,
        dense_params: float,
    ) -> list[tuple[StepOneModel, FittedDevice]]:
        by_device: dict[str, list[ArchSample]] = defaultdict(list)
        for sample in samples:
            by_device[sample.device].append(sample)

        results = []
        for device, device_samples in by_device.items():
            step_one = ProfilerService.fit_step_one(device_samples)
            results.append((step_one, ProfilerService.fit_step_two(step_one, conv_params, dense_params)))
        return results


profiler_service = ProfilerService()
