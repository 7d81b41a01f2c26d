"""Domain types shared by every stage of the pipeline.

All types validate their invariants at construction and are treated as
immutable afterwards, so instances can be shared freely across concurrent
pipeline runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

import numpy as np

from ..errors import ConfigError
from . import masks as mask_ops

DEFAULT_RESOLUTION = 400
DEFAULT_NEIGHBORS = 400
DEFAULT_TOP_K = 5

# Rescoring multiplies a detector score by exp(mean saliency), and saliency
# lives in [0, 2], so rescored scores are bounded by e^2 times the raw score.
MAX_SALIENCY_PROMPT = math.exp(2.0)

ABLATION_KEYS = ("language", "property", "saliency", "confidence")


class StageTag(str, Enum):
    GENERATED = "generated"
    REFINED = "refined"
    FILTERED = "filtered"
    RESCORED = "rescored"
    SELECTED = "selected"


@dataclass(frozen=True)
class ImageRecord:
    """An RGB image normalized to [0, 1], plus its pre-resize size."""

    id: str
    category: str
    pixels: np.ndarray  # (h, w, 3) float
    original_size: tuple[int, int]  # (height, width)

    def __post_init__(self) -> None:
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"image {self.id!r}: expected (h, w, 3) pixels, got {px.shape}")
        if px.size and (float(px.min()) < 0.0 or float(px.max()) > 1.0):
            raise ValueError(f"image {self.id!r}: pixel values must lie in [0, 1]")

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])


@dataclass(frozen=True)
class BoxCandidate:
    """A detector hit: half-open box, confidence in [0, 1], matched phrase."""

    box: tuple[int, int, int, int]  # (x0, y0, x1, y1)
    score: float
    phrase: str

    def __post_init__(self) -> None:
        x0, y0, x1, y1 = self.box
        if not (0 <= x0 < x1 and 0 <= y0 < y1):
            raise ValueError(f"degenerate box {self.box}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"box score {self.score} outside [0, 1]")

    def validate_bounds(self, height: int, width: int) -> None:
        x0, y0, x1, y1 = self.box
        if x1 > width or y1 > height:
            raise ValueError(f"box {self.box} exceeds image bounds {width}x{height}")


@dataclass(frozen=True)
class RegionCandidate:
    """A mask-level candidate carrying its score and originating phrase.

    Scores are plain non-negative reals: rescoring can push them above 1
    (bounded by e^2 times the raw detector score) and the metric sweeps
    thresholds, so no normalization is ever applied.
    """

    mask: np.ndarray  # (h, w) bool
    score: float
    phrase: str
    stage_tag: StageTag = StageTag.REFINED

    def __post_init__(self) -> None:
        if self.mask.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {self.mask.shape}")
        if self.score < 0.0:
            raise ValueError(f"negative candidate score {self.score}")
        if self.stage_tag != StageTag.GENERATED and mask_ops.mask_area(self.mask) == 0:
            raise ValueError(f"empty mask for stage {self.stage_tag.value} candidate {self.phrase!r}")

    @property
    def area(self) -> int:
        return mask_ops.mask_area(self.mask)

    def with_stage(self, tag: StageTag, score: float | None = None) -> "RegionCandidate":
        return replace(self, stage_tag=tag, score=self.score if score is None else score)


@dataclass(frozen=True)
class SaliencyMap:
    """Per-pixel (or per-grid-cell) self-dissimilarity field in [0, 2]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim != 2:
            raise ValueError(f"saliency values must be 2-D, got shape {v.shape}")
        if v.size and (float(v.min()) < 0.0 or float(v.max()) > 2.0):
            raise ValueError("saliency values must lie in [0, 2]")

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.values.shape[0]), int(self.values.shape[1]))


@dataclass(frozen=True)
class AnomalyMap:
    """Final per-pixel anomaly score field. Uncovered pixels are exactly 0."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim != 2:
            raise ValueError(f"anomaly values must be 2-D, got shape {v.shape}")
        if v.size and float(v.min()) < 0.0:
            raise ValueError("anomaly values must be non-negative")

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.values.shape[0]), int(self.values.shape[1]))


def validate_anomaly_map(amap: AnomalyMap, candidates: list[RegionCandidate], atol: float = 1e-9) -> None:
    """Assert the fusion invariants of an anomaly map against its inputs.

    Uncovered pixels must be exactly 0; every covered pixel must lie within
    [min, max] of the scores of the candidates covering it.
    """
    values = amap.values
    if not candidates:
        if np.any(values != 0.0):
            raise AssertionError("map without candidates must be all-zero")
        return
    stack = np.stack([c.mask.astype(bool) for c in candidates])
    scores = np.array([c.score for c in candidates], dtype=float)
    coverage = stack.any(axis=0)
    if np.any(values[~coverage] != 0.0):
        raise AssertionError("uncovered pixels must be exactly 0")
    with np.errstate(invalid="ignore"):
        lo = np.where(stack, scores[:, None, None], np.inf).min(axis=0)
        hi = np.where(stack, scores[:, None, None], -np.inf).max(axis=0)
    cov = coverage & True
    if np.any(values[cov] < lo[cov] - atol) or np.any(values[cov] > hi[cov] + atol):
        raise AssertionError("covered pixel outside [min, max] of contributing scores")


@dataclass(frozen=True)
class PromptProfile:
    """Every expert-authored knob the pipeline honors.

    ablation_drops removes individual prompt families: "language" falls back
    to the naive prompt, "property" skips the filter, "saliency" pins all
    saliency prompts to 1, "confidence" fuses every filtered candidate
    instead of the top k_top.
    """

    class_agnostic_prompts: tuple[str, ...] = ("anomaly", "defect")
    class_specific_prompts: tuple[str, ...] = ()
    object_prompt: str = ""
    theta_iou: float = 0.5
    theta_area: float = 0.5
    overlap_measure: str = "containment"  # or "iou"
    k_top: int = DEFAULT_TOP_K
    n_neighbors: int = DEFAULT_NEIGHBORS
    working_resolution: int = DEFAULT_RESOLUTION
    box_score_floor: float = 0.25
    # Detector text threshold for remote adapters; default not validated
    # against any published configuration.
    text_score_floor: float = 0.25
    mode: str = "saa_plus"  # or "saa"
    ablation_drops: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "class_agnostic_prompts", tuple(self.class_agnostic_prompts))
        object.__setattr__(self, "class_specific_prompts", tuple(self.class_specific_prompts))
        object.__setattr__(self, "ablation_drops", frozenset(self.ablation_drops))
        if not 0.0 <= self.theta_iou <= 1.0:
            raise ConfigError(f"theta_iou {self.theta_iou} outside [0, 1]")
        if not 0.0 < self.theta_area <= 1.0:
            raise ConfigError(f"theta_area {self.theta_area} outside (0, 1]")
        if self.overlap_measure not in ("iou", "containment"):
            raise ConfigError(f"unknown overlap_measure {self.overlap_measure!r}")
        if self.k_top < 1:
            raise ConfigError(f"k_top must be >= 1, got {self.k_top}")
        if self.n_neighbors < 1:
            raise ConfigError(f"n_neighbors must be >= 1, got {self.n_neighbors}")
        if self.working_resolution < 1:
            raise ConfigError(f"working_resolution must be >= 1, got {self.working_resolution}")
        if not 0.0 <= self.box_score_floor <= 1.0:
            raise ConfigError(f"box_score_floor {self.box_score_floor} outside [0, 1]")
        if not 0.0 <= self.text_score_floor <= 1.0:
            raise ConfigError(f"text_score_floor {self.text_score_floor} outside [0, 1]")
        if self.mode not in ("saa", "saa_plus"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        unknown = self.ablation_drops - set(ABLATION_KEYS)
        if unknown:
            raise ConfigError(f"unknown ablation drops: {sorted(unknown)}")
        if "language" not in self.ablation_drops and self.mode == "saa_plus":
            if not self.class_agnostic_prompts and not self.class_specific_prompts:
                raise ConfigError("prompt lists may not both be empty unless language is dropped")

    def drops(self, key: str) -> bool:
        return key in self.ablation_drops

    def to_dict(self) -> dict[str, Any]:
        return {
            "class_agnostic_prompts": list(self.class_agnostic_prompts),
            "class_specific_prompts": list(self.class_specific_prompts),
            "object_prompt": self.object_prompt,
            "theta_iou": self.theta_iou,
            "theta_area": self.theta_area,
            "overlap_measure": self.overlap_measure,
            "k_top": self.k_top,
            "n_neighbors": self.n_neighbors,
            "working_resolution": self.working_resolution,
            "box_score_floor": self.box_score_floor,
            "text_score_floor": self.text_score_floor,
            "mode": self.mode,
            "ablation_drops": sorted(self.ablation_drops),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PromptProfile":
        if not isinstance(data, dict):
            raise ConfigError(f"profile must be a JSON object, got {type(data).__name__}")
        known = {
            "class_agnostic_prompts",
            "class_specific_prompts",
            "object_prompt",
            "theta_iou",
            "theta_area",
            "overlap_measure",
            "k_top",
            "n_neighbors",
            "working_resolution",
            "box_score_floor",
            "text_score_floor",
            "mode",
            "ablation_drops",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown profile fields: {sorted(unknown)}")
        kwargs = dict(data)
        if "class_agnostic_prompts" in kwargs:
            kwargs["class_agnostic_prompts"] = tuple(kwargs["class_agnostic_prompts"])
        if "class_specific_prompts" in kwargs:
            kwargs["class_specific_prompts"] = tuple(kwargs["class_specific_prompts"])
        if "ablation_drops" in kwargs:
            kwargs["ablation_drops"] = frozenset(kwargs["ablation_drops"])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"bad profile document: {exc}") from exc
