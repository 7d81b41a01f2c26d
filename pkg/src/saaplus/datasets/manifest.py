"""Declarative dataset manifests and builders for common on-disk layouts.

Manifest schema (JSON):

    {
      "dataset": "<name>",
      "entries": [
        {
          "id": "<optional, defaults to <category>/<image stem>>",
          "image": "<path, relative to the manifest file>",
          "category": "<category name>",
          "split": "test",
          "mask": "<path relative to the manifest>" | "none"
        },
        ...
      ]
    }

Boxes and masks throughout the package use x-horizontal / y-vertical
coordinates with the origin at the top-left and half-open box bounds.
"mask": "none" marks a normal image; its ground truth is all-zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core import ImageRecord
from ..errors import ConfigError
from ..imaging import load_image, load_mask


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    image_path: Path
    category: str
    split: str
    mask_path: Path | None  # None marks a normal image

    @property
    def is_normal(self) -> bool:
        return self.mask_path is None


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    root: Path
    entries: tuple[ManifestEntry, ...]

    @property
    def categories(self) -> list[str]:
        seen: dict[str, None] = {}
        for e in self.entries:
            seen.setdefault(e.category, None)
        return list(seen)

    def by_category(self, category: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.category == category]

    def entry(self, image_id: str) -> ManifestEntry:
        for e in self.entries:
            if e.id == image_id:
                return e
        raise KeyError(image_id)

    def load_image(self, entry: ManifestEntry, resolution: int) -> ImageRecord:
        return load_image(entry.image_path, entry.id, entry.category, resolution)

    def load_ground_truth(self, entry: ManifestEntry, resolution: int) -> np.ndarray:
        if entry.mask_path is None:
            return np.zeros((resolution, resolution), dtype=bool)
        return load_mask(entry.mask_path, resolution)


def load_manifest(path: str | Path) -> DatasetManifest:
    """Parse and validate a manifest file. Every referenced path must exist."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"manifest file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"manifest {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "entries" not in raw or "dataset" not in raw:
        raise ConfigError(f"manifest {path} must be an object with 'dataset' and 'entries'")
    if not isinstance(raw["entries"], list):
        raise ConfigError(f"manifest {path}: 'entries' must be a list")

    root = path.parent
    entries: list[ManifestEntry] = []
    seen_ids: set[str] = set()
    for i, item in enumerate(raw["entries"]):
        if not isinstance(item, dict):
            raise ConfigError(f"manifest {path}: entry #{i} is not an object")
        missing = {"image", "category", "split", "mask"} - set(item)
        if missing:
            raise ConfigError(f"manifest {path}: entry #{i} missing fields {sorted(missing)}")
        if item["split"] != "test":
            raise ConfigError(f"manifest {path}: entry #{i} has unsupported split {item['split']!r}")
        image_path = root / str(item["image"])
        if not image_path.exists():
            raise ConfigError(f"manifest {path}: image does not exist: {image_path}")
        mask_value = item["mask"]
        if mask_value == "none":
            mask_path = None
        else:
            mask_path = root / str(mask_value)
            if not mask_path.exists():
                raise ConfigError(f"manifest {path}: mask does not exist: {mask_path}")
        category = str(item["category"])
        entry_id = str(item.get("id") or f"{category}/{image_path.stem}")
        if entry_id in seen_ids:
            raise ConfigError(f"manifest {path}: duplicate image id {entry_id!r}")
        seen_ids.add(entry_id)
        entries.append(
            ManifestEntry(
                id=entry_id,
                image_path=image_path,
                category=category,
                split="test",
                mask_path=mask_path,
            )
        )
    return DatasetManifest(name=str(raw["dataset"]), root=root, entries=tuple(entries))


def build_mvtec_style_manifest(root: str | Path, dataset_name: str | None = None) -> dict:
    """Manifest dict for a <category>/test/<defect>/*.png layout with
    ground_truth/<defect>/*_mask.png companions (normal images under
    test/good get mask "none")."""
    root = Path(root)
    if not root.is_dir():
        raise ConfigError(f"dataset root is not a directory: {root}")
    entries = []
    for category_dir in sorted(p for p in root.iterdir() if (p / "test").is_dir()):
        category = category_dir.name
        for defect_dir in sorted((category_dir / "test").iterdir()):
            if not defect_dir.is_dir():
                continue
            for image_path in sorted(defect_dir.glob("*.png")):
                if defect_dir.name == "good":
                    mask = "none"
                else:
                    mask_path = (
                        category_dir / "ground_truth" / defect_dir.name / f"{image_path.stem}_mask.png"
                    )
                    if not mask_path.exists():
                        raise ConfigError(f"missing ground-truth mask: {mask_path}")
                    mask = str(mask_path.relative_to(root))
                entries.append(
                    {
                        "id": f"{category}/{defect_dir.name}/{image_path.stem}",
                        "image": str(image_path.relative_to(root)),
                        "category": category,
                        "split": "test",
                        "mask": mask,
                    }
                )
    if not entries:
        raise ConfigError(f"no test images found under {root}")
    return {"dataset": dataset_name or root.name, "entries": entries}


def build_visa_style_manifest(root: str | Path, dataset_name: str | None = None) -> dict:
    """Manifest dict for a <category>/Data/Images/{Normal,Anomaly}/*.JPG
    layout with Masks/Anomaly/*.png companions."""
    root = Path(root)
    if not root.is_dir():
        raise ConfigError(f"dataset root is not a directory: {root}")
    entries = []
    for category_dir in sorted(p for p in root.iterdir() if (p / "Data" / "Images").is_dir()):
        category = category_dir.name
        images = category_dir / "Data" / "Images"
        for image_path in sorted((images / "Normal").glob("*.*")):
            entries.append(
                {
                    "id": f"{category}/normal/{image_path.stem}",
                    "image": str(image_path.relative_to(root)),
                    "category": category,
                    "split": "test",
                    "mask": "none",
                }
            )
        masks = category_dir / "Data" / "Masks" / "Anomaly"
        for image_path in sorted((images / "Anomaly").glob("*.*")):
            mask_path = masks / f"{image_path.stem}.png"
            if not mask_path.exists():
                raise ConfigError(f"missing ground-truth mask: {mask_path}")
            entries.append(
                {
                    "id": f"{category}/anomaly/{image_path.stem}",
                    "image": str(image_path.relative_to(root)),
                    "category": category,
                    "split": "test",
                    "mask": str(mask_path.relative_to(root)),
                }
            )
    if not entries:
        raise ConfigError(f"no test images found under {root}")
    return {"dataset": dataset_name or root.name, "entries": entries}
