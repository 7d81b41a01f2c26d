"""The individual regularization stages the runner composes.

Each stage is a pure function over candidate lists: property filtering
(keep candidates inside the object and not larger than a fraction of it),
saliency rescoring (score times exp-mean-saliency prompt), top-K selection,
and weighted-average fusion into the final anomaly map.
"""

from __future__ import annotations

import numpy as np

from ..backends.base import BackendSet
from ..core import (
    AnomalyMap,
    ImageRecord,
    RegionCandidate,
    StageTag,
    mask_area,
    overlap,
)

# Below this detector confidence an object detection is considered unusable
# and locate_object falls back to the full image.
OBJECT_SCORE_FLOOR = 0.2


def locate_object(image: ImageRecord, object_prompt: str, backends: BackendSet) -> np.ndarray:
    """Mask of the inspected object: the best refined detection for the
    object prompt, or the full image when detection is missing or weak."""
    full = np.ones((image.height, image.width), dtype=bool)
    if not object_prompt.strip():
        return full
    boxes = backends.generator.generate(image, [object_prompt], score_floor=0.0)
    if not boxes:
        return full
    best = max(boxes, key=lambda b: b.score)
    if best.score < OBJECT_SCORE_FLOOR:
        return full
    refined = backends.refiner.refine(image, [best])
    if not refined:
        return full
    return refined[0].mask.astype(bool)


def property_filter(
    candidates: list[RegionCandidate],
    object_mask: np.ndarray,
    theta_iou: float,
    theta_area: float,
    overlap_measure: str = "containment",
) -> list[RegionCandidate]:
    """Keep candidates that overlap the object enough and are small enough.

    A candidate survives when overlap(candidate, object, measure) >= theta_iou
    and area(candidate) <= theta_area * area(object). Order and scores are
    preserved; output is always a subsequence of the input.
    """
    object_area = mask_area(object_mask)
    kept = []
    for cand in candidates:
        if overlap(cand.mask, object_mask, overlap_measure) < theta_iou:
            continue
        if cand.area > theta_area * object_area:
            continue
        kept.append(cand.with_stage(StageTag.FILTERED))
    return kept


def rescore(candidates: list[RegionCandidate], saliency_prompts: list[float]) -> list[RegionCandidate]:
    """Multiply each candidate score by its saliency prompt, elementwise."""
    if len(candidates) != len(saliency_prompts):
        raise ValueError(
            f"{len(candidates)} candidates but {len(saliency_prompts)} saliency prompts"
        )
    return [
        cand.with_stage(StageTag.RESCORED, score=cand.score * prompt)
        for cand, prompt in zip(candidates, saliency_prompts)
    ]


def select_top_k(candidates: list[RegionCandidate], k: int) -> list[RegionCandidate]:
    """The min(k, n) highest-scoring candidates, score-descending.

    Ties are broken by original position, earlier wins.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ranked = sorted(enumerate(candidates), key=lambda item: (-item[1].score, item[0]))
    return [cand.with_stage(StageTag.SELECTED) for _, cand in ranked[:k]]


def fuse(candidates: list[RegionCandidate]) -> AnomalyMap:
    """Coverage-weighted average of candidate scores per pixel.

    A(y, x) = sum_r mask_r(y, x) * score_r / sum_r mask_r(y, x), and exactly
    0 where no candidate covers the pixel.
    """
    if not candidates:
        raise ValueError("fuse requires candidates or an explicit shape; use fuse_with_shape")
    return fuse_with_shape(candidates, candidates[0].mask.shape)


def fuse_with_shape(candidates: list[RegionCandidate], shape: tuple[int, int]) -> AnomalyMap:
    """fuse() that also handles the empty candidate list (all-zero map)."""
    acc = np.zeros(shape, dtype=np.float64)
    coverage = np.zeros(shape, dtype=np.float64)
    for cand in candidates:
        if cand.mask.shape != shape:
            raise ValueError(f"candidate mask {cand.mask.shape} does not match {shape}")
        m = cand.mask.astype(np.float64)
        acc += m * cand.score
        coverage += m
    values = np.divide(acc, coverage, out=np.zeros(shape, dtype=np.float64), where=coverage > 0)
    return AnomalyMap(values)


def deduplicate(candidates: list[RegionCandidate]) -> list[RegionCandidate]:
    """Merge candidates with identical masks and phrases, keeping max score.

    Querying with several prompts naturally duplicates detections; order of
    first appearance is preserved.
    """
    merged: list[RegionCandidate] = []
    index: dict[tuple[str, bytes], int] = {}
    for cand in candidates:
        key = (cand.phrase, np.packbits(cand.mask.astype(np.uint8)).tobytes())
        if key in index:
            at = index[key]
            if cand.score > merged[at].score:
                merged[at] = merged[at].with_stage(merged[at].stage_tag, score=cand.score)
        else:
            index[key] = len(merged)
            merged.append(cand)
    return merged
