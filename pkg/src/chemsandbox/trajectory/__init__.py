"""Tool-use trajectories: validation, replay, refinement and SFT emission."""

from .model import PROVENANCES, STEP_KINDS, Step, Trajectory, load_trajectories
from .pipeline import (
    ByteTokenizer,
    HttpSandbox,
    IdentityRewriter,
    Mismatch,
    ReplayReport,
    Rewriter,
    RuleBasedRewriter,
    ValidationReport,
    Violation,
    dataset_manifest,
    emit_sft,
    record_trajectory,
    refine,
    replay,
    validate,
)

__all__ = [
    "PROVENANCES",
    "STEP_KINDS",
    "ByteTokenizer",
    "HttpSandbox",
    "IdentityRewriter",
    "Mismatch",
    "ReplayReport",
    "Rewriter",
    "RuleBasedRewriter",
    "Step",
    "Trajectory",
    "ValidationReport",
    "Violation",
    "dataset_manifest",
    "emit_sft",
    "load_trajectories",
    "record_trajectory",
    "refine",
    "replay",
    "validate",
]
