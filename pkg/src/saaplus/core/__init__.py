from .masks import decode_rle, encode_rle, mask_area, overlap, rasterize_box
from .types import (
    ABLATION_KEYS,
    DEFAULT_NEIGHBORS,
    DEFAULT_RESOLUTION,
    DEFAULT_TOP_K,
    MAX_SALIENCY_PROMPT,
    AnomalyMap,
    BoxCandidate,
    ImageRecord,
    PromptProfile,
    RegionCandidate,
    SaliencyMap,
    StageTag,
    validate_anomaly_map,
)

__all__ = [
    "ABLATION_KEYS",
    "DEFAULT_NEIGHBORS",
    "DEFAULT_RESOLUTION",
    "DEFAULT_TOP_K",
    "MAX_SALIENCY_PROMPT",
    "AnomalyMap",
    "BoxCandidate",
    "ImageRecord",
    "PromptProfile",
    "RegionCandidate",
    "SaliencyMap",
    "StageTag",
    "decode_rle",
    "encode_rle",
    "mask_area",
    "overlap",
    "rasterize_box",
    "validate_anomaly_map",
]
