from .runner import NAIVE_PROMPT, STAGE_ORDER, PipelineTrace, resolve_prompts, run, run_saa, run_saa_plus
from .stages import (
    OBJECT_SCORE_FLOOR,
    deduplicate,
    fuse,
    fuse_with_shape,
    locate_object,
    property_filter,
    rescore,
    select_top_k,
)

__all__ = [
    "NAIVE_PROMPT",
    "OBJECT_SCORE_FLOOR",
    "STAGE_ORDER",
    "PipelineTrace",
    "deduplicate",
    "fuse",
    "fuse_with_shape",
    "locate_object",
    "property_filter",
    "rescore",
    "resolve_prompts",
    "run",
    "run_saa",
    "run_saa_plus",
    "select_top_k",
]
