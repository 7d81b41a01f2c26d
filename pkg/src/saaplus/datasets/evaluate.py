"""Category-pooled evaluation and the ablation runner.

Pixels are pooled per category across all of its test images (normal
images contribute negative pixels, so false alarms on them hurt); the
dataset score is the unweighted mean over categories. The ablation table
has the fixed five-row structure: one row per dropped prompt family, then
the full configuration.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ..backends.base import BackendSet
from ..core import AnomalyMap, PromptProfile
from ..errors import MetricUndefinedError, SaaError
from ..pipeline import run
from .manifest import DatasetManifest, ManifestEntry
from .metrics import confusion_at_threshold, max_f1_pixel, pool_sizes

ABLATION_ROWS = (
    ("w/o P^L", frozenset({"language"})),
    ("w/o P^P", frozenset({"property"})),
    ("w/o P^S", frozenset({"saliency"})),
    ("w/o P^C", frozenset({"confidence"})),
    ("full", frozenset()),
)


@dataclass(frozen=True)
class CategoryResult:
    category: str
    max_f1_pixel: float
    threshold: float
    pixel_counts: dict[str, int]
    image_count: int


@dataclass(frozen=True)
class EvalReport:
    dataset: str
    mode: str
    ablation_drops: tuple[str, ...]
    profile_hash: str
    categories: tuple[CategoryResult, ...]
    mean_max_f1_pixel: float

    def to_json_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "mode": self.mode,
            "ablation_drops": list(self.ablation_drops),
            "profile_hash": self.profile_hash,
            "categories": [
                {
                    "category": c.category,
                    "max_f1_pixel": c.max_f1_pixel,
                    "threshold": c.threshold,
                    "pixel_counts": c.pixel_counts,
                    "image_count": c.image_count,
                }
                for c in self.categories
            ],
            "mean_max_f1_pixel": self.mean_max_f1_pixel,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "EvalReport":
        return cls(
            dataset=data["dataset"],
            mode=data["mode"],
            ablation_drops=tuple(data["ablation_drops"]),
            profile_hash=data["profile_hash"],
            categories=tuple(
                CategoryResult(
                    category=c["category"],
                    max_f1_pixel=c["max_f1_pixel"],
                    threshold=c["threshold"],
                    pixel_counts=dict(c["pixel_counts"]),
                    image_count=c["image_count"],
                )
                for c in data["categories"]
            ),
            mean_max_f1_pixel=data["mean_max_f1_pixel"],
        )


@dataclass
class AblationTable:
    dataset: str
    profile_hash: str
    rows: list[dict] = field(default_factory=list)  # {label, report | error}

    def to_json_dict(self) -> dict:
        out_rows = []
        for row in self.rows:
            if "error" in row:
                out_rows.append({"label": row["label"], "error": row["error"]})
            else:
                out_rows.append({"label": row["label"], "report": row["report"].to_json_dict()})
        return {"dataset": self.dataset, "profile_hash": self.profile_hash, "rows": out_rows}


def profile_hash(profile: PromptProfile) -> str:
    text = json.dumps(profile.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def evaluate_category(
    manifest: DatasetManifest,
    category: str,
    profile: PromptProfile,
    backends: BackendSet,
    predictions: dict[str, AnomalyMap] | None = None,
    progress: Callable[[ManifestEntry], None] | None = None,
) -> CategoryResult:
    """Pool one category's pixels and score them.

    When `predictions` is given (image id -> map) the pipeline is not run;
    otherwise every image of the category is pushed through it.
    """
    entries = manifest.by_category(category)
    if not entries:
        raise SaaError(f"category {category!r} has no entries")
    maps = []
    gts = []
    for entry in entries:
        if progress is not None:
            progress(entry)
        if predictions is not None:
            if entry.id not in predictions:
                raise SaaError(f"no prediction supplied for image {entry.id!r}")
            amap = predictions[entry.id]
        else:
            try:
                image = manifest.load_image(entry, profile.working_resolution)
                amap, _ = run(image, profile, backends)
            except SaaError as exc:
                # preserve the error class (transport vs config) but name the image
                raise type(exc)(f"image {entry.id!r}: {exc}") from exc
            except Exception as exc:
                raise SaaError(f"pipeline failed on image {entry.id!r}: {exc}") from exc
        maps.append(amap)
        gts.append(manifest.load_ground_truth(entry, profile.working_resolution))
    try:
        score, threshold = max_f1_pixel(maps, gts)
    except MetricUndefinedError as exc:
        raise MetricUndefinedError(f"category {category!r}: {exc}") from exc
    counts = confusion_at_threshold(maps, gts, threshold)
    counts.update(pool_sizes(gts))
    return CategoryResult(
        category=category,
        max_f1_pixel=score,
        threshold=threshold,
        pixel_counts=counts,
        image_count=len(entries),
    )


def evaluate_dataset(
    manifest: DatasetManifest,
    profile: PromptProfile,
    backends: BackendSet,
    predictions: dict[str, AnomalyMap] | None = None,
) -> EvalReport:
    results = [
        evaluate_category(manifest, category, profile, backends, predictions=predictions)
        for category in manifest.categories
    ]
    mean = float(np.mean([r.max_f1_pixel for r in results])) if results else 0.0
    return EvalReport(
        dataset=manifest.name,
        mode=profile.mode,
        ablation_drops=tuple(sorted(profile.ablation_drops)),
        profile_hash=profile_hash(profile),
        categories=tuple(results),
        mean_max_f1_pixel=mean,
    )


def run_ablations(
    manifest: DatasetManifest, profile: PromptProfile, backends: BackendSet
) -> AblationTable:
    """Evaluate the full configuration and each single-prompt drop.

    A failing row records its error; the remaining rows are still produced.
    """
    table = AblationTable(dataset=manifest.name, profile_hash=profile_hash(profile))
    for label, drops in ABLATION_ROWS:
        variant = replace(profile, ablation_drops=frozenset(drops), mode="saa_plus")
        try:
            report = evaluate_dataset(manifest, variant, backends)
            table.rows.append({"label": label, "report": report})
        except SaaError as exc:
            table.rows.append({"label": label, "error": str(exc)})
    return table
