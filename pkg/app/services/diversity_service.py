import logging
from typing import Sequence

import numpy as np

from app.config.settings import settings
from app.exceptions import DegenerateDenominator, ShapeMismatch, TooFewUsers
from app.models.gradient_model import DiversityEntry, LayeredGradient

logger = logging.getLogger(__name__)


class DiversityService:

    @staticmethod
    def _check_shapes(first: LayeredGradient, second: LayeredGradient) -> None:
        if first.shape != second.shape:
            raise ShapeMismatch(f"layer shapes differ: {first.shape} vs {second.shape}")

    @staticmethod
    def gradient_diversity(local: LayeredGradient, global_: LayeredGradient) -> float:
        """S / (S + P) with S the squared local norm and P the layer-wise inner product.

        Below 1 the local update leans with the global one, exactly 1 when they are
        orthogonal, and above 1 when they pull apart.
        """
        DiversityService._check_shapes(local, global_)

        squared = sum(float(np.dot(g, g)) for g in map(np.asarray, local.layers))
        inner = sum(
            float(np.dot(np.asarray(g), np.asarray(h)))
            for g, h in zip(local.layers, global_.layers)
        )
        denominator = squared + inner
        if denominator <= settings.DIVERSITY_DEGENERACY_EPS * squared or squared == 0.0:
            raise DegenerateDenominator(
                f"diversity undefined: S={squared:.6g}, P={inner:.6g}",
                details={"squared_norm": squared, "inner_product": inner},
            )
        return squared / denominator

    @staticmethod
    def leave_one_out_mean(users: Sequence[LayeredGradient], excluded: int) -> LayeredGradient:
        others = [u for i, u in enumerate(users) if i != excluded]
        layers = tuple(
            tuple(np.mean([np.asarray(u.layers[layer]) for u in others], axis=0).tolist())
            for layer in range(len(users[0].layers))
        )
        return LayeredGradient(layers=layers)

    @staticmethod
    def diversity_rank(users: Sequence[LayeredGradient]) -> list[DiversityEntry]:
        if len(users) < 2:
            raise TooFewUsers(f"ranking needs at least two users, got {len(users)}")
        for user in users[1:]:
            DiversityService._check_shapes(users[0], user)

        ranked, flagged = [], []
        for index, user in enumerate(users):
            global_ = DiversityService.leave_one_out_mean(users, index)
            try:
                value = DiversityService.gradient_diversity(user, global_)
                ranked.append(DiversityEntry(user=index, diversity=value))
            except DegenerateDenominator as e:
                logger.warning(f"User {index} excluded from ranking: {e.message}")
                flagged.append(DiversityEntry(user=index, diversity=None, degenerate=True))

        ranked.sort(key=lambda entry: (-entry.diversity, entry.user))
        return ranked + flagged


diversity_service = DiversityService()
