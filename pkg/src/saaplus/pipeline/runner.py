"""Pipeline orchestration: the naive cascade and the prompt-regularized one.

The naive run prompts the detector with a single class-agnostic phrase,
refines boxes to masks and fuses everything with raw detector scores. The
regularized run inserts the four prompt families in between: expert
language prompts widen the query, property rules discard candidates that
sit outside the inspected object or are too large, saliency prompts
recalibrate scores by image self-similarity, and the confidence prompt
keeps the top K before fusion. Each family can be dropped independently
for ablations, and dropping all four reduces exactly to the naive run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..backends.base import BackendSet
from ..core import (
    AnomalyMap,
    BoxCandidate,
    ImageRecord,
    PromptProfile,
    RegionCandidate,
    SaliencyMap,
    StageTag,
    encode_rle,
)
from ..saliency import saliency_map, saliency_prompts, upsample_saliency
from .stages import deduplicate, fuse_with_shape, locate_object, property_filter, rescore, select_top_k

STAGE_ORDER = ("generated", "refined", "filtered", "rescored", "selected", "fused")

NAIVE_PROMPT = "anomaly"


@dataclass
class PipelineTrace:
    """Snapshot of every stage of one pipeline run, for debugging and UI.

    Timings are kept in memory only; serialized traces are a pure function
    of (image, profile, fixtures) so reruns are byte-identical.
    """

    image_id: str
    mode: str
    ablation_drops: tuple[str, ...]
    prompts: tuple[str, ...]
    generated: list[BoxCandidate] = field(default_factory=list)
    refined: list[RegionCandidate] = field(default_factory=list)
    filtered: list[RegionCandidate] = field(default_factory=list)
    rescored: list[RegionCandidate] = field(default_factory=list)
    selected: list[RegionCandidate] = field(default_factory=list)
    object_mask: np.ndarray | None = None
    saliency_grid: SaliencyMap | None = None
    saliency_full: SaliencyMap | None = None
    timings_ms: dict[str, float] = field(default_factory=dict)

    @property
    def stage_counts(self) -> dict[str, int]:
        return {
            "generated": len(self.generated),
            "refined": len(self.refined),
            "filtered": len(self.filtered),
            "rescored": len(self.rescored),
            "selected": len(self.selected),
        }

    def to_json_dict(self) -> dict:
        def region(c: RegionCandidate) -> dict:
            return {"phrase": c.phrase, "score": c.score, "mask_rle": encode_rle(c.mask)}

        return {
            "image_id": self.image_id,
            "mode": self.mode,
            "ablation_drops": sorted(self.ablation_drops),
            "prompts": list(self.prompts),
            "stages": {
                "generated": [
                    {"phrase": b.phrase, "score": b.score, "box": list(b.box)} for b in self.generated
                ],
                "refined": [region(c) for c in self.refined],
                "filtered": [region(c) for c in self.filtered],
                "rescored": [region(c) for c in self.rescored],
                "selected": [region(c) for c in self.selected],
            },
            "object_mask_rle": encode_rle(self.object_mask) if self.object_mask is not None else None,
            "saliency_grid": (
                {
                    "gh": self.saliency_grid.shape[0],
                    "gw": self.saliency_grid.shape[1],
                    "values": self.saliency_grid.values.tolist(),
                }
                if self.saliency_grid is not None
                else None
            ),
        }


def resolve_prompts(profile: PromptProfile) -> tuple[str, ...]:
    """The prompt list a run sends to the generator."""
    if profile.mode == "saa":
        naive = profile.class_agnostic_prompts[0] if profile.class_agnostic_prompts else NAIVE_PROMPT
        return (naive,)
    if profile.drops("language"):
        return (NAIVE_PROMPT,)
    seen: dict[str, None] = {}
    for p in profile.class_agnostic_prompts + profile.class_specific_prompts:
        seen.setdefault(p, None)
    return tuple(seen)


def run(image: ImageRecord, profile: PromptProfile, backends: BackendSet) -> tuple[AnomalyMap, PipelineTrace]:
    """Execute the pipeline in the profile's mode."""
    if profile.mode == "saa":
        _, amap, trace = run_saa(
            image,
            profile.class_agnostic_prompts[0] if profile.class_agnostic_prompts else NAIVE_PROMPT,
            backends,
            box_score_floor=profile.box_score_floor,
        )
        return amap, trace
    return run_saa_plus(image, profile, backends)


def run_saa(
    image: ImageRecord,
    naive_prompt: str,
    backends: BackendSet,
    box_score_floor: float = 0.25,
) -> tuple[list[RegionCandidate], AnomalyMap, PipelineTrace]:
    """Naive cascade: detect with one prompt, refine, fuse raw scores."""
    profile = PromptProfile(
        class_agnostic_prompts=(naive_prompt,),
        class_specific_prompts=(),
        mode="saa",
        box_score_floor=box_score_floor,
        ablation_drops=frozenset(),
    )
    amap, trace = _execute(image, profile, backends, prompts=(naive_prompt,), regularize=False)
    return list(trace.refined), amap, trace


def run_saa_plus(
    image: ImageRecord, profile: PromptProfile, backends: BackendSet
) -> tuple[AnomalyMap, PipelineTrace]:
    """Prompt-regularized cascade, honoring the profile's ablation drops."""
    return _execute(image, profile, backends, prompts=resolve_prompts(profile), regularize=True)


def _execute(
    image: ImageRecord,
    profile: PromptProfile,
    backends: BackendSet,
    prompts: tuple[str, ...],
    regularize: bool,
) -> tuple[AnomalyMap, PipelineTrace]:
    shape = (image.height, image.width)
    mode = "saa_plus" if regularize else "saa"
    trace = PipelineTrace(
        image_id=image.id,
        mode=mode,
        ablation_drops=tuple(sorted(profile.ablation_drops)) if regularize else (),
        prompts=prompts,
    )
    timer = _StageTimer(trace)

    with timer.stage("generated"):
        trace.generated = backends.generator.generate(image, list(prompts), profile.box_score_floor)

    with timer.stage("refined"):
        refined = backends.refiner.refine(image, trace.generated)
        trace.refined = deduplicate(refined)

    use_property = regularize and not profile.drops("property")
    use_saliency = regularize and not profile.drops("saliency")
    use_confidence = regularize and not profile.drops("confidence")

    with timer.stage("filtered"):
        if use_property:
            trace.object_mask = locate_object(image, profile.object_prompt, backends)
            trace.filtered = property_filter(
                trace.refined,
                trace.object_mask,
                theta_iou=profile.theta_iou,
                theta_area=profile.theta_area,
                overlap_measure=profile.overlap_measure,
            )
        else:
            trace.filtered = [c.with_stage(StageTag.FILTERED) for c in trace.refined]

    with timer.stage("rescored"):
        if use_saliency:
            grid = saliency_map(backends.features.extract_features(image), profile.n_neighbors)
            trace.saliency_grid = grid
            trace.saliency_full = upsample_saliency(grid, image.height, image.width)
            prompts_values = saliency_prompts(trace.saliency_full, trace.filtered)
        else:
            prompts_values = [1.0] * len(trace.filtered)
        trace.rescored = rescore(trace.filtered, prompts_values)

    with timer.stage("selected"):
        if use_confidence:
            trace.selected = select_top_k(trace.rescored, profile.k_top)
        else:
            trace.selected = [c.with_stage(StageTag.SELECTED) for c in trace.rescored]

    with timer.stage("fused"):
        amap = fuse_with_shape(trace.selected, shape)

    return amap, trace


class _StageTimer:
    def __init__(self, trace: PipelineTrace):
        self.trace = trace

    def stage(self, name: str) -> "_StageScope":
        return _StageScope(self.trace, name)


class _StageScope:
    def __init__(self, trace: PipelineTrace, name: str):
        self.trace = trace
        self.name = name

    def __enter__(self) -> None:
        self.start = time.perf_counter()

    def __exit__(self, *exc_info) -> None:
        self.trace.timings_ms[self.name] = (time.perf_counter() - self.start) * 1000.0
