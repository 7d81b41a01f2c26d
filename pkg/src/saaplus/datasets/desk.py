"""Synthetic desk-scale benchmark with oracle fixtures.

Three categories, five 400x400 images each (four defective, one normal).
Every defective image carries one true defect plus the three distractor
flavors the prompt families are designed to remove:

* an out-of-object region (removed by the location rule),
* an oversized region equal to the object (removed by the area rule),
* a visually unremarkable look-alike with a high detector score (demoted
  below the true defect by saliency rescoring, cut by top-K selection).

The true defect is only reachable through class-specific language prompts;
the naive prompt sees just the distractors. Colors are chosen so the mock
grid features give the defect a much higher self-dissimilarity than the
look-alike, with wide margins; `verify_desk_dataset` replays the actual
pipeline over every image and asserts each mechanism works before the
dataset is accepted.

Patches are drawn one grid cell wider than their fixture masks on every
side so masked saliency means sample the flat interior of each patch, not
the bilinear falloff at its edges.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ..backends import BackendSet, GridFeatureExtractor, OracleFixture, OracleGenerator, OracleRefiner
from ..core import PromptProfile, encode_rle
from ..pipeline import run_saa, run_saa_plus
from .manifest import DatasetManifest, load_manifest

RESOLUTION = 400
GRID = 20
CELL = RESOLUTION // GRID

# Unit-sphere geometry drives the saliency split: background and object hues
# are warm so the cold defect color is far from everything, while the
# look-alike sits a hair away from the object color.
COLOR_BACKGROUND = (0.95, 0.85, 0.30)
COLOR_OBJECT = (0.90, 0.55, 0.25)
COLOR_DEFECT = (0.05, 0.10, 0.95)
COLOR_LOOKALIKE = (0.88, 0.57, 0.27)
COLOR_OUTLIER = (0.02, 0.35, 0.90)

SCORE_OBJECT = 0.95
SCORE_DEFECT = 0.60
SCORE_DUP1 = 0.30
SCORE_DUP2 = 0.28
SCORE_LOOKALIKE = 0.90
SCORE_OUTLIER = 0.80
SCORE_OVERSIZED = 0.75


@dataclass(frozen=True)
class DeskCategory:
    name: str
    object_noun: str
    specific_prompts: tuple[str, str]
    defect_phrase: str
    duplicate_phrases: tuple[str, str]


CATEGORIES = (
    DeskCategory("candle", "candle", ("overlong wick", "burnt wick tip"), "overlong wick", ("wick", "wick tip")),
    DeskCategory("capsule", "capsule", ("cracked shell", "leaking seam"), "cracked shell", ("crack", "seam")),
    DeskCategory("wafer", "wafer", ("deep scratch mark", "stain spot"), "deep scratch mark", ("scratch", "stain")),
)

# (object cell rect (r0, c0, r1, c1) half-open, defect patch top-left cell,
#  look-alike patch top-left cell, outlier patch top-left cell); patches are
# 3x3 cells, their fixture masks the central 2x2-cell-sized square.
LAYOUTS = (
    ((4, 6, 16, 18), (6, 8), (11, 13), (5, 1)),
    ((3, 2, 15, 14), (5, 4), (10, 9), (6, 16)),
    ((5, 5, 17, 17), (12, 12), (7, 7), (2, 1)),
    ((4, 4, 16, 16), (8, 11), (12, 6), (17, 1)),
    ((4, 5, 16, 17), (7, 7), (11, 12), (2, 1)),  # normal image: no defect drawn
)
IMAGES_PER_CATEGORY = len(LAYOUTS)
NORMAL_INDEX = IMAGES_PER_CATEGORY - 1


def desk_profile() -> PromptProfile:
    """The tuned expert profile shipped with the desk benchmark."""
    specific: list[str] = []
    for cat in CATEGORIES:
        specific.extend(cat.specific_prompts)
    return PromptProfile(
        class_agnostic_prompts=("anomaly", "defect"),
        class_specific_prompts=tuple(specific),
        object_prompt=". ".join(cat.object_noun for cat in CATEGORIES) + ".",
        theta_iou=0.5,
        theta_area=0.4,
        overlap_measure="containment",
        k_top=1,  # desk images carry exactly one defect region
        n_neighbors=400,
        working_resolution=RESOLUTION,
        box_score_floor=0.25,
        mode="saa_plus",
    )


def _cell_rect_to_px(rect: tuple[int, int, int, int]) -> tuple[int, int, int, int]:
    r0, c0, r1, c1 = rect
    return (c0 * CELL, r0 * CELL, c1 * CELL, r1 * CELL)  # (x0, y0, x1, y1)


def _patch_px(top_left_cell: tuple[int, int]) -> tuple[int, int, int, int]:
    """Pixel box of a 3x3-cell visual patch."""
    r, c = top_left_cell
    return (c * CELL, r * CELL, (c + 3) * CELL, (r + 3) * CELL)


def _patch_mask_px(top_left_cell: tuple[int, int]) -> tuple[int, int, int, int]:
    """Pixel box of the patch's fixture mask: central square, half a cell in
    from each visual edge."""
    r, c = top_left_cell
    half = CELL // 2
    return (c * CELL + half, r * CELL + half, (c + 3) * CELL - half, (r + 3) * CELL - half)


def _fill(img: np.ndarray, box: tuple[int, int, int, int], color: tuple[float, float, float]) -> None:
    x0, y0, x1, y1 = box
    img[y0:y1, x0:x1] = color


def _category_color(color: tuple[float, float, float], category_index: int) -> tuple[float, float, float]:
    """Rotate RGB channels per category: makes categories visually distinct
    while preserving every cosine similarity (channel permutation is
    orthogonal), so the saliency margins are identical across categories."""
    k = category_index % 3
    return tuple(np.roll(np.asarray(color), k))  # type: ignore[return-value]


def _box_rle(box: tuple[int, int, int, int]) -> str:
    x0, y0, x1, y1 = box
    mask = np.zeros((RESOLUTION, RESOLUTION), dtype=bool)
    mask[y0:y1, x0:x1] = True
    return encode_rle(mask)


def _render_image(layout, defective: bool, category_index: int) -> np.ndarray:
    obj_rect, defect_cell, lookalike_cell, outlier_cell = layout
    img = np.empty((RESOLUTION, RESOLUTION, 3), dtype=np.float64)
    img[:, :] = _category_color(COLOR_BACKGROUND, category_index)
    _fill(img, _cell_rect_to_px(obj_rect), _category_color(COLOR_OBJECT, category_index))
    _fill(img, _patch_px(outlier_cell), _category_color(COLOR_OUTLIER, category_index))
    if defective:
        _fill(img, _patch_px(defect_cell), _category_color(COLOR_DEFECT, category_index))
        _fill(img, _patch_px(lookalike_cell), _category_color(COLOR_LOOKALIKE, category_index))
    return img


def _image_entries(category: DeskCategory, layout, defective: bool) -> list[dict]:
    obj_rect, defect_cell, lookalike_cell, outlier_cell = layout
    obj_box = _cell_rect_to_px(obj_rect)
    outlier_box = _patch_mask_px(outlier_cell)
    entries = [
        {"phrase": category.object_noun, "box": list(obj_box), "score": SCORE_OBJECT,
         "mask": _box_rle(obj_box)},
        {"phrase": "anomaly", "box": list(outlier_box), "score": SCORE_OUTLIER,
         "mask": _box_rle(outlier_box)},
        {"phrase": "anomaly", "box": list(obj_box), "score": SCORE_OVERSIZED,
         "mask": _box_rle(obj_box)},
    ]
    if defective:
        defect_box = _patch_mask_px(defect_cell)
        lookalike_box = _patch_mask_px(lookalike_cell)
        defect_rle = _box_rle(defect_box)
        entries.extend(
            [
                {"phrase": category.defect_phrase, "box": list(defect_box), "score": SCORE_DEFECT,
                 "mask": defect_rle},
                {"phrase": category.duplicate_phrases[0], "box": list(defect_box), "score": SCORE_DUP1,
                 "mask": defect_rle},
                {"phrase": category.duplicate_phrases[1], "box": list(defect_box), "score": SCORE_DUP2,
                 "mask": defect_rle},
                {"phrase": "anomaly", "box": list(lookalike_box), "score": SCORE_LOOKALIKE,
                 "mask": _box_rle(lookalike_box)},
            ]
        )
    return entries


def _save_png(path: Path, array: np.ndarray) -> None:
    data = np.clip(np.round(array * 255.0), 0, 255).astype(np.uint8)
    mode = "RGB" if data.ndim == 3 else "L"
    Image.fromarray(data, mode=mode).save(path, format="PNG")


def build_desk_dataset(root: str | Path, verify: bool = True) -> Path:
    """Write the benchmark under `root`; returns the manifest path."""
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(parents=True, exist_ok=True)

    manifest_entries = []
    fixtures: dict[str, list[dict]] = {}
    for cat_index, category in enumerate(CATEGORIES):
        for idx, layout in enumerate(LAYOUTS):
            defective = idx != NORMAL_INDEX
            image_id = f"{category.name}/{idx:03d}"
            stem = f"{category.name}_{idx:03d}"
            _save_png(root / "images" / f"{stem}.png", _render_image(layout, defective, cat_index))
            mask_field = "none"
            if defective:
                x0, y0, x1, y1 = _patch_mask_px(layout[1])
                gt = np.zeros((RESOLUTION, RESOLUTION), dtype=np.float64)
                gt[y0:y1, x0:x1] = 1.0
                _save_png(root / "masks" / f"{stem}.png", gt)
                mask_field = f"masks/{stem}.png"
            manifest_entries.append(
                {
                    "id": image_id,
                    "image": f"images/{stem}.png",
                    "category": category.name,
                    "split": "test",
                    "mask": mask_field,
                }
            )
            fixtures[image_id] = _image_entries(category, layout, defective)

    manifest_path = root / "manifest.json"
    manifest_path.write_text(
        json.dumps({"dataset": "desk", "entries": manifest_entries}, indent=1) + "\n"
    )
    (root / "fixtures.json").write_text(OracleFixture.from_raw(fixtures).to_json() + "\n")

    profile = desk_profile()
    profile_doc = {
        "schema_version": 1,
        "id": "desk-default",
        "display_name": "Desk benchmark tuned profile",
        "version": 1,
        "profile": profile.to_dict(),
    }
    (root / "profile.json").write_text(json.dumps(profile_doc, indent=1, sort_keys=True) + "\n")

    if verify:
        verify_desk_dataset(root)
    return manifest_path


def desk_backends(root: str | Path) -> BackendSet:
    fixture = OracleFixture.load(Path(root) / "fixtures.json")
    return BackendSet(
        generator=OracleGenerator(fixture),
        refiner=OracleRefiner(fixture),
        features=GridFeatureExtractor(GRID),
    )


def verify_desk_dataset(root: str | Path) -> None:
    """Replay the pipeline over the generated data and assert that every
    distractor is removed by exactly the intended prompt family."""
    root = Path(root)
    manifest = load_manifest(root / "manifest.json")
    backends = desk_backends(root)
    profile = desk_profile()
    _verify_with(manifest, profile, backends)


def _verify_with(manifest: DatasetManifest, profile: PromptProfile, backends: BackendSet) -> None:
    from dataclasses import replace

    for entry in manifest.entries:
        image = manifest.load_image(entry, profile.working_resolution)
        gt = manifest.load_ground_truth(entry, profile.working_resolution)
        defective = entry.mask_path is not None

        full_map, full_trace = run_saa_plus(image, profile, backends)
        nonzero = full_map.values > 0
        if defective:
            if not np.array_equal(nonzero, gt):
                raise AssertionError(f"{entry.id}: full pipeline map does not equal ground truth")
        elif nonzero.any():
            raise AssertionError(f"{entry.id}: full pipeline fired on a normal image")

        no_prop, _ = run_saa_plus(image, replace(profile, ablation_drops=frozenset({"property"})), backends)
        obj_mask = full_trace.object_mask
        if obj_mask is None or not (no_prop.values[~obj_mask] > 0).any():
            raise AssertionError(f"{entry.id}: property drop should leak an out-of-object region")

        if defective:
            no_sal, _ = run_saa_plus(image, replace(profile, ablation_drops=frozenset({"saliency"})), backends)
            if (no_sal.values[gt] > 0).any():
                raise AssertionError(f"{entry.id}: saliency drop should lose the defect to the look-alike")

            no_conf, _ = run_saa_plus(image, replace(profile, ablation_drops=frozenset({"confidence"})), backends)
            fp = no_conf.values[~gt]
            if not fp.max() > no_conf.values[gt].min():
                raise AssertionError(f"{entry.id}: confidence drop should rank a false alarm above the defect")

            no_lang, _ = run_saa_plus(image, replace(profile, ablation_drops=frozenset({"language"})), backends)
            if (no_lang.values[gt] > 0).any():
                raise AssertionError(f"{entry.id}: language drop should miss the defect entirely")

            _, saa_map, _ = run_saa(image, "anomaly", backends, box_score_floor=profile.box_score_floor)
            if not (saa_map.values[~gt] > 0).any():
                raise AssertionError(f"{entry.id}: naive run should raise false alarms")
