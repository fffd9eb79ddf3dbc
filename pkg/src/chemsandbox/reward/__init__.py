"""Format check and the weighted chemical reward."""

from .scoring import (
    COMPONENTS,
    DEFAULT_PROFILES,
    PROPERTIES,
    TASK_KINDS,
    RewardBreakdown,
    RewardConfig,
    TaskSpec,
    combine_chem,
    combine_total,
    group_fidelity,
    load_config,
    property_shift,
    score,
    score_batch,
    structural_similarity,
)
from .transcript import FormatReport, Segment, check_format, extract_answer, render_segment, render_transcript, segment_transcript

__all__ = [
    "COMPONENTS",
    "DEFAULT_PROFILES",
    "PROPERTIES",
    "TASK_KINDS",
    "FormatReport",
    "RewardBreakdown",
    "RewardConfig",
    "Segment",
    "TaskSpec",
    "check_format",
    "combine_chem",
    "combine_total",
    "extract_answer",
    "group_fidelity",
    "load_config",
    "property_shift",
    "render_segment",
    "render_transcript",
    "score",
    "score_batch",
    "segment_transcript",
    "structural_similarity",
]
