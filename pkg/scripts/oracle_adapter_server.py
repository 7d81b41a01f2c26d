#!/usr/bin/env python3
"""Reference model-adapter server backed by an oracle fixture file.

Serves the three-endpoint adapter protocol the pipeline's remote backends
speak, answering from a fixtures.json instead of real models. Useful for
integration-testing the remote transport path end to end:

    python3 scripts/oracle_adapter_server.py --fixtures data/desk/fixtures.json --port 8800

    export SAA_BACKEND_GENERATE_URL=http://127.0.0.1:8800/v1/generate
    export SAA_BACKEND_REFINE_URL=http://127.0.0.1:8800/v1/refine
    export SAA_BACKEND_FEATURES_URL=http://127.0.0.1:8800/v1/features
    saaplus run --manifest data/desk/manifest.json --profile data/desk/profile.json \
        --mode saa+ --out /tmp/remote_run

A GPU adapter replaces this script with one that loads real models
(GroundingDINO-style detector behind /v1/generate, SAM-style segmenter
behind /v1/refine, a WideResNet50 backbone behind /v1/features) while
keeping the same request and response schemas; the pipeline needs no code
changes. Since fixtures key detections by image id but the protocol only
carries pixels, this stand-in matches request images to fixture ids by
pixel content.
"""

from __future__ import annotations

import argparse
import base64
import hashlib
import json
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from saaplus.backends import GridFeatureExtractor, OracleFixture, OracleGenerator, OracleRefiner
from saaplus.core import BoxCandidate, ImageRecord, encode_rle
from saaplus.imaging import png_bytes_to_pixels


def _digest(pixels: np.ndarray) -> str:
    quantized = np.clip(np.round(pixels * 255.0), 0, 255).astype(np.uint8)
    return hashlib.sha256(quantized.tobytes()).hexdigest()


def build_handler(fixture: OracleFixture, manifest_root: Path | None):
    generator = OracleGenerator(fixture)
    refiner = OracleRefiner(fixture)
    features = GridFeatureExtractor()

    # Map image pixel digests back to fixture ids.
    digest_to_id: dict[str, str] = {}
    if manifest_root is not None:
        from saaplus.datasets import load_manifest

        manifest = load_manifest(manifest_root / "manifest.json")
        for entry in manifest.entries:
            record = manifest.load_image(entry, 400)
            digest_to_id[_digest(record.pixels)] = entry.id

    def record_for(payload: dict) -> ImageRecord:
        pixels = png_bytes_to_pixels(base64.b64decode(payload["image"]))
        image_id = digest_to_id.get(_digest(pixels), "unknown")
        return ImageRecord(image_id, "remote", pixels, pixels.shape[:2])

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            try:
                payload = json.loads(self.rfile.read(length))
                if self.path == "/v1/generate":
                    image = record_for(payload)
                    hits = generator.generate(
                        image, list(payload["prompts"]), float(payload.get("box_threshold", 0.0))
                    )
                    body = {
                        "detections": [
                            {"box": list(c.box), "score": c.score, "phrase": c.phrase} for c in hits
                        ]
                    }
                elif self.path == "/v1/refine":
                    image = record_for(payload)
                    boxes = [
                        BoxCandidate(tuple(int(v) for v in b), 1.0, "box")
                        for b in payload["boxes"]
                    ]
                    masks = refiner.refine(image, boxes)
                    body = {"masks": [encode_rle(m.mask) for m in masks]}
                elif self.path == "/v1/features":
                    image = record_for(payload)
                    grid = features.extract_features(image)
                    gh, gw, d = grid.shape
                    body = {
                        "shape": [gh, gw, d],
                        "data": base64.b64encode(grid.vectors.astype("<f4").tobytes()).decode(),
                    }
                else:
                    self.send_error(404)
                    return
            except Exception as exc:  # adapter contract: errors become 500s
                self.send_error(500, str(exc))
                return
            data = json.dumps(body).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, fmt, *args):
            print(f"adapter: {fmt % args}")

    return Handler


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--fixtures", required=True, help="oracle fixtures.json")
    parser.add_argument("--manifest-dir", default=None,
                        help="dataset directory (for matching request images to fixture ids); "
                        "defaults to the fixtures file's directory")
    parser.add_argument("--port", type=int, default=8800)
    parser.add_argument("--host", default="127.0.0.1")
    args = parser.parse_args()

    fixtures_path = Path(args.fixtures)
    manifest_root = Path(args.manifest_dir) if args.manifest_dir else fixtures_path.parent
    if not (manifest_root / "manifest.json").exists():
        manifest_root = None

    handler = build_handler(OracleFixture.load(fixtures_path), manifest_root)
    server = ThreadingHTTPServer((args.host, args.port), handler)
    print(f"oracle adapter serving on http://{args.host}:{args.port} (fixtures: {fixtures_path})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    sys.exit(main())
