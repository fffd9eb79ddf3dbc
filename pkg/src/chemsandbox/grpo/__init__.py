"""SFT and GRPO objectives with exact gradients, plus a toy policy to train."""

from .objective import (
    GroupSample,
    GrpoConfig,
    ObjectiveTerms,
    TokenSequence,
    group_advantages,
    grpo_objective,
    grpo_terms,
    kl_penalty,
    sft_loss,
)
from .toy import BigramPolicy, LearningCurve, Rollout, toy_policy_rollout, total_variation, train_toy

__all__ = [
    "BigramPolicy",
    "GroupSample",
    "GrpoConfig",
    "LearningCurve",
    "ObjectiveTerms",
    "Rollout",
    "TokenSequence",
    "group_advantages",
    "grpo_objective",
    "grpo_terms",
    "kl_penalty",
    "sft_loss",
    "toy_policy_rollout",
    "total_variation",
    "train_toy",
]
