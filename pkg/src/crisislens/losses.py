"""Multi-task loss assembly: the differentiable soft-count reward surrogate
and the weighted total over classification, emotion, behavior, and the
reward deficit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor
from .errors import ConfigError, DataError, NumericError
from .graph import RewardWeights

SOFT_EPS = 1e-8


@dataclass
class LossWeights:
    """Nonnegative mixing weights for the four loss terms."""

    classification: float = 1.0
    emotion: float = 0.5
    behavior: float = 0.5
    reinforcement: float = 0.25

    def __post_init__(self):
        for name in ("classification", "emotion", "behavior", "reinforcement"):
            if getattr(self, name) < 0:
                raise ConfigError(f"loss weight {name} must be nonnegative")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.classification, self.emotion, self.behavior, self.reinforcement)


@dataclass
class LossBreakdown:
    """Per-term loss values plus their weighted total."""

    classification: float
    emotion: float
    behavior: float
    reinforcement: float
    total: float

    def validate(self, weights: LossWeights) -> "LossBreakdown":
        expected = (
            weights.classification * self.classification
            + weights.emotion * self.emotion
            + weights.behavior * self.behavior
            + weights.reinforcement * self.reinforcement
        )
        if abs(self.total - expected) > 1e-9:
            raise NumericError(
                f"loss total {self.total} inconsistent with weighted sum {expected}"
            )
        return self


def soft_reward(crisis_probs: Tensor, labels, weights: RewardWeights) -> Tensor:
    """Differentiable precision/recall/F1 reward from predicted probabilities.

    Soft counts replace the hard ones: softP = sum(p*y) / (sum(p) + eps),
    softR = sum(p*y) / (sum(y) + eps), softF1 from those. Coincides with the
    hard reward (up to eps) when every probability is exactly 0 or 1.
    """
    if crisis_probs.data.ndim != 1:
        raise DataError(f"soft_reward expects a probability vector, got {crisis_probs.data.shape}")
    pd = crisis_probs.data
    if (pd < 0).any() or (pd > 1).any():
        bad = float(pd[(pd < 0) | (pd > 1)][0])
        raise DataError(f"probability outside [0, 1]: {bad}")
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != pd.shape:
        raise DataError(f"labels shape {y.shape} does not match probabilities {pd.shape}")
    if y.size and not np.isin(y, (0.0, 1.0)).all():
        raise DataError("soft_reward labels must be binary (0/1)")
    y_t = Tensor(y)
    tp = (crisis_probs * y_t).sum()
    p_soft = tp / (crisis_probs.sum() + SOFT_EPS)
    r_soft = tp / (float(y.sum()) + SOFT_EPS)
    f1_soft = (p_soft * r_soft * 2.0) / (p_soft + r_soft + SOFT_EPS)
    return p_soft * weights.lambda1 + r_soft * weights.lambda2 + f1_soft * weights.lambda3


def reinforcement_deficit(crisis_probs: Tensor, labels, weights: RewardWeights) -> Tensor:
    """Minimizable nonnegative deficit: (weight total) - soft reward."""
    return soft_reward(crisis_probs, labels, weights) * -1.0 + weights.total


def total_loss(
    classification: Tensor,
    emotion: Tensor,
    behavior: Tensor,
    reinforcement: Tensor,
    weights: LossWeights,
) -> Tensor:
    """Weighted sum of the four scalar loss terms; linear in each component."""
    for name, part in (
        ("classification", classification),
        ("emotion", emotion),
        ("behavior", behavior),
        ("reinforcement", reinforcement),
    ):
        if part.data.size != 1:
            raise DataError(f"loss component {name} must be scalar, got shape {part.data.shape}")
        if not np.isfinite(part.data).all():
            raise NumericError(f"loss component {name} is non-finite")
    return (
        classification * weights.classification
        + emotion * weights.emotion
        + behavior * weights.behavior
        + reinforcement * weights.reinforcement
    )
