"""Backend interfaces for the three external models.

The pipeline only ever talks to these three surfaces: a prompt-guided box
detector (generator), a box-prompted mask segmenter (refiner), and a patch
feature extractor. Real foundation models live out of process behind the
HTTP adapter protocol in `remote`; the `oracle` module provides
deterministic in-process stand-ins for testing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from ..core import BoxCandidate, ImageRecord, RegionCandidate
from ..saliency import FeatureGrid


@dataclass(frozen=True)
class BackendDescriptor:
    """Capability card a backend publishes about itself."""

    name: str
    max_prompt_length: int = 256
    score_semantics: str = "confidence in [0, 1]"
    reentrant: bool = True


@runtime_checkable
class GeneratorBackend(Protocol):
    descriptor: BackendDescriptor

    def generate(
        self, image: ImageRecord, prompts: list[str], score_floor: float
    ) -> list[BoxCandidate]:
        """Return box candidates matching the prompts, score >= score_floor,
        ordered by score descending, then phrase, then box."""
        ...


@runtime_checkable
class RefinerBackend(Protocol):
    descriptor: BackendDescriptor

    def refine(self, image: ImageRecord, boxes: list[BoxCandidate]) -> list[RegionCandidate]:
        """Return one mask candidate per input box, scores and phrases
        carried over unchanged."""
        ...


@runtime_checkable
class FeatureExtractor(Protocol):
    descriptor: BackendDescriptor

    def extract_features(self, image: ImageRecord) -> FeatureGrid:
        """Return a grid of unit-normalized feature vectors."""
        ...


@dataclass(frozen=True)
class BackendSet:
    """The three backends a pipeline run needs, bundled."""

    generator: GeneratorBackend
    refiner: RefinerBackend
    features: FeatureExtractor
