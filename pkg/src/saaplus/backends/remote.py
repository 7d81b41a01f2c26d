"""HTTP clients for out-of-process model adapters.

Real foundation models (the grounding detector, the box-prompted segmenter,
the CNN feature backbone) are never linked into this package: they run as
separate adapter services speaking a small JSON protocol:

    POST /v1/generate {image: b64 PNG, prompts: [str],
                       box_threshold: float, text_threshold: float}
        -> {detections: [{box: [x0, y0, x1, y1], score: float, phrase: str}]}
    POST /v1/refine   {image: b64 PNG, boxes: [[x0, y0, x1, y1]]}
        -> {masks: [RLE string]}
    POST /v1/features {image: b64 PNG}
        -> {shape: [gh, gw, d], data: b64 little-endian float32, row-major}

Unless an adapter's descriptor declares parallelism, each client keeps at
most one request in flight per endpoint. Connection failures, timeouts and
malformed payloads all surface as TransportError, which callers distinguish
from legitimately empty results.
"""

from __future__ import annotations

import base64
import logging
import threading

import numpy as np
import requests

from ..core import BoxCandidate, ImageRecord, RegionCandidate, StageTag, decode_rle, rasterize_box
from ..errors import TransportError
from ..imaging import image_to_png_bytes
from ..saliency import FeatureGrid
from .base import BackendDescriptor

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 60.0


class _RemoteClient:
    def __init__(self, url: str, name: str, retries: int = 2, timeout: float = DEFAULT_TIMEOUT,
                 parallel: bool = False):
        self.url = url.rstrip("/")
        self.retries = retries
        self.timeout = timeout
        self.descriptor = BackendDescriptor(name=name, reentrant=parallel)
        self._lock = threading.Lock() if not parallel else None
        self._session = requests.Session()

    def _post(self, payload: dict) -> dict:
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                if self._lock is not None:
                    with self._lock:
                        response = self._session.post(self.url, json=payload, timeout=self.timeout)
                else:
                    response = self._session.post(self.url, json=payload, timeout=self.timeout)
                if response.status_code != 200:
                    raise TransportError(
                        f"{self.descriptor.name}: adapter returned HTTP {response.status_code}"
                    )
                try:
                    body = response.json()
                except ValueError as exc:
                    raise TransportError(f"{self.descriptor.name}: non-JSON adapter reply") from exc
                if not isinstance(body, dict):
                    raise TransportError(f"{self.descriptor.name}: adapter reply is not an object")
                return body
            except TransportError as exc:
                last_error = exc
            except requests.RequestException as exc:
                last_error = TransportError(f"{self.descriptor.name}: {exc}")
            if attempt < self.retries:
                logger.warning("%s: retrying after failure (%s)", self.descriptor.name, last_error)
        raise last_error  # type: ignore[misc]

    @staticmethod
    def _encode_image(image: ImageRecord) -> str:
        return base64.b64encode(image_to_png_bytes(image)).decode("ascii")


class RemoteGenerator(_RemoteClient):
    """Client for a prompt-guided detector adapter (POST /v1/generate)."""

    def __init__(self, url: str, text_threshold: float = 0.25, **kwargs):
        super().__init__(url, name=f"remote-generator({url})", **kwargs)
        self.text_threshold = text_threshold

    def generate(self, image: ImageRecord, prompts: list[str], score_floor: float) -> list[BoxCandidate]:
        if not prompts:
            raise ValueError("generate requires at least one prompt")
        body = self._post(
            {
                "image": self._encode_image(image),
                "prompts": list(prompts),
                "box_threshold": score_floor,
                "text_threshold": self.text_threshold,
            }
        )
        try:
            detections = body["detections"]
            hits = []
            for det in detections:
                cand = BoxCandidate(
                    box=tuple(int(v) for v in det["box"]),  # type: ignore[arg-type]
                    score=float(det["score"]),
                    phrase=str(det["phrase"]).lower(),
                )
                cand.validate_bounds(image.height, image.width)
                if cand.score >= score_floor:
                    hits.append(cand)
        except (KeyError, TypeError, ValueError) as exc:
            raise TransportError(f"{self.descriptor.name}: malformed detections: {exc}") from exc
        hits.sort(key=lambda c: (-c.score, c.phrase, c.box))
        return hits


class RemoteRefiner(_RemoteClient):
    """Client for a box-prompted segmenter adapter (POST /v1/refine)."""

    def __init__(self, url: str, **kwargs):
        super().__init__(url, name=f"remote-refiner({url})", **kwargs)

    def refine(self, image: ImageRecord, boxes: list[BoxCandidate]) -> list[RegionCandidate]:
        if not boxes:
            return []
        body = self._post(
            {
                "image": self._encode_image(image),
                "boxes": [list(c.box) for c in boxes],
            }
        )
        try:
            rles = body["masks"]
            if len(rles) != len(boxes):
                raise TransportError(
                    f"{self.descriptor.name}: got {len(rles)} masks for {len(boxes)} boxes"
                )
            out = []
            for cand, rle in zip(boxes, rles):
                mask = decode_rle(str(rle)) if rle else rasterize_box(cand.box, image.height, image.width)
                if mask.shape != (image.height, image.width):
                    raise TransportError(f"{self.descriptor.name}: mask shape {mask.shape} mismatch")
                if not mask.any():
                    logger.warning("refiner returned an empty mask for %r, dropping", cand.phrase)
                    continue
                out.append(RegionCandidate(mask=mask, score=cand.score, phrase=cand.phrase,
                                           stage_tag=StageTag.REFINED))
        except TransportError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise TransportError(f"{self.descriptor.name}: malformed masks: {exc}") from exc
        return out


class RemoteFeatureExtractor(_RemoteClient):
    """Client for a feature backbone adapter (POST /v1/features)."""

    def __init__(self, url: str, **kwargs):
        super().__init__(url, name=f"remote-features({url})", **kwargs)

    def extract_features(self, image: ImageRecord) -> FeatureGrid:
        body = self._post({"image": self._encode_image(image)})
        try:
            gh, gw, d = (int(v) for v in body["shape"])
            raw = base64.b64decode(body["data"])
            flat = np.frombuffer(raw, dtype="<f4").astype(np.float64)
            if flat.size != gh * gw * d:
                raise TransportError(
                    f"{self.descriptor.name}: payload holds {flat.size} floats, "
                    f"shape wants {gh * gw * d}"
                )
            vectors = flat.reshape(gh, gw, d)
        except TransportError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise TransportError(f"{self.descriptor.name}: malformed features: {exc}") from exc
        norms = np.linalg.norm(vectors, axis=2, keepdims=True)
        unit = np.divide(vectors, norms, out=np.zeros_like(vectors), where=norms > 1e-12)
        unit[norms[..., 0] <= 1e-12] = np.concatenate(([1.0], np.zeros(d - 1)))
        return FeatureGrid(unit)
