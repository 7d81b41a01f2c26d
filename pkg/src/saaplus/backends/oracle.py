"""Deterministic fixture-driven stand-ins for the foundation models.

The oracle fixture lists, per image id, the detections a real detector
would have produced: phrase, box, score and optionally a mask. The mock
generator answers prompt queries by case-insensitive substring matching
between the fixture phrase and the query prompt (either direction), which
mirrors open-vocabulary detectors returning the matched span. The mock
refiner hands back the fixture mask when present and falls back to the
rasterized box. Both are pure functions of (fixture, inputs).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core import BoxCandidate, ImageRecord, RegionCandidate, StageTag, decode_rle, rasterize_box
from ..errors import FixtureError
from ..saliency import FeatureGrid
from .base import BackendDescriptor

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FixtureEntry:
    phrase: str
    box: tuple[int, int, int, int]
    score: float
    mask_rle: str | None = None


class OracleFixture:
    """Per-image detection tables backing the mock generator and refiner."""

    def __init__(self, entries: dict[str, list[FixtureEntry]]):
        for image_id, items in entries.items():
            for e in items:
                x0, y0, x1, y1 = e.box
                if not (0 <= x0 < x1 and 0 <= y0 < y1):
                    raise FixtureError(f"fixture {image_id!r}: degenerate box {e.box}")
                if not 0.0 <= e.score <= 1.0:
                    raise FixtureError(f"fixture {image_id!r}: score {e.score} outside [0, 1]")
        self.entries = {
            image_id: [
                FixtureEntry(e.phrase.lower(), e.box, e.score, e.mask_rle) for e in items
            ]
            for image_id, items in entries.items()
        }

    @classmethod
    def load(cls, path: str | Path) -> "OracleFixture":
        path = Path(path)
        if not path.exists():
            raise FixtureError(f"fixture file not found: {path}")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise FixtureError(f"fixture file {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise FixtureError(f"fixture file {path} must map image ids to entry lists")
        return cls.from_raw(raw)

    @classmethod
    def from_raw(cls, raw: dict) -> "OracleFixture":
        entries: dict[str, list[FixtureEntry]] = {}
        for image_id, items in raw.items():
            if not isinstance(items, list):
                raise FixtureError(f"fixture {image_id!r}: entries must be a list")
            parsed = []
            for item in items:
                try:
                    parsed.append(
                        FixtureEntry(
                            phrase=str(item["phrase"]),
                            box=tuple(int(v) for v in item["box"]),  # type: ignore[arg-type]
                            score=float(item["score"]),
                            mask_rle=item.get("mask"),
                        )
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise FixtureError(f"fixture {image_id!r}: bad entry {item!r}: {exc}") from exc
            entries[image_id] = parsed
        return cls(entries)

    def to_json(self) -> str:
        payload = {
            image_id: [
                {"phrase": e.phrase, "box": list(e.box), "score": e.score, "mask": e.mask_rle}
                for e in items
            ]
            for image_id, items in self.entries.items()
        }
        return json.dumps(payload, indent=1, sort_keys=True)


def _phrase_matches(fixture_phrase: str, prompt: str) -> bool:
    p = prompt.strip().lower()
    if not p:
        return False
    return fixture_phrase in p or p in fixture_phrase


class OracleGenerator:
    """Generator mock that answers queries from a fixture table."""

    def __init__(self, fixture: OracleFixture):
        self.fixture = fixture
        self.descriptor = BackendDescriptor(name="oracle-generator")

    def generate(
        self, image: ImageRecord, prompts: list[str], score_floor: float
    ) -> list[BoxCandidate]:
        if not prompts:
            raise ValueError("generate requires at least one prompt")
        hits: list[BoxCandidate] = []
        for entry in self.fixture.entries.get(image.id, []):
            if entry.score < score_floor:
                continue
            if any(_phrase_matches(entry.phrase, p) for p in prompts):
                cand = BoxCandidate(box=entry.box, score=entry.score, phrase=entry.phrase)
                cand.validate_bounds(image.height, image.width)
                hits.append(cand)
        hits.sort(key=lambda c: (-c.score, c.phrase, c.box))
        return hits


class OracleRefiner:
    """Refiner mock: fixture mask when present, rasterized box otherwise."""

    def __init__(self, fixture: OracleFixture):
        self.fixture = fixture
        self.descriptor = BackendDescriptor(name="oracle-refiner")
        self._mask_by_key = {
            (image_id, e.phrase, e.box): e.mask_rle
            for image_id, items in fixture.entries.items()
            for e in items
        }

    def refine(self, image: ImageRecord, boxes: list[BoxCandidate]) -> list[RegionCandidate]:
        out: list[RegionCandidate] = []
        for cand in boxes:
            rle = self._mask_by_key.get((image.id, cand.phrase, cand.box))
            if rle is not None:
                mask = decode_rle(rle)
                if mask.shape != (image.height, image.width):
                    raise FixtureError(
                        f"fixture mask shape {mask.shape} does not match image "
                        f"{image.height}x{image.width} for {cand.phrase!r}"
                    )
            else:
                mask = rasterize_box(cand.box, image.height, image.width)
            if not mask.any():
                logger.warning("refiner produced an empty mask for %r, dropping", cand.phrase)
                continue
            out.append(
                RegionCandidate(mask=mask, score=cand.score, phrase=cand.phrase, stage_tag=StageTag.REFINED)
            )
        return out


class GridFeatureExtractor:
    """Mock feature extractor: mean RGB over a fixed cell grid, unit-normalized.

    Deterministic and cheap, yet structured enough that the kNN saliency map
    is meaningful: visually distinct patches produce distinct features.
    """

    def __init__(self, grid: int = 20):
        if grid < 2:
            raise ValueError("grid must be at least 2 cells per side")
        self.grid = grid
        self.descriptor = BackendDescriptor(name=f"grid-mean-rgb-{grid}x{grid}")

    def extract_features(self, image: ImageRecord) -> FeatureGrid:
        g = self.grid
        h, w = image.height, image.width
        if h < g or w < g:
            raise ValueError(f"image {h}x{w} smaller than feature grid {g}x{g}")
        ys = (np.arange(g + 1) * h) // g
        xs = (np.arange(g + 1) * w) // g
        feats = np.empty((g, g, 3), dtype=np.float64)
        px = image.pixels.astype(np.float64)
        for i in range(g):
            for j in range(g):
                cell = px[ys[i] : ys[i + 1], xs[j] : xs[j + 1]]
                feats[i, j] = cell.reshape(-1, 3).mean(axis=0)
        norms = np.linalg.norm(feats, axis=2, keepdims=True)
        unit = np.divide(feats, norms, out=np.zeros_like(feats), where=norms > 1e-12)
        degenerate = norms[..., 0] <= 1e-12
        unit[degenerate] = np.array([1.0, 0.0, 0.0])
        return FeatureGrid(unit)
