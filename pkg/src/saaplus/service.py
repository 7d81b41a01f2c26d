"""HTTP API consumed by the workbench UI.

    GET  /api/health
    GET  /api/images
    GET  /api/images/{id}/png
    GET  /api/profiles
    GET  /api/profiles/{id}
    PUT  /api/profiles/{id}
    POST /api/run            {image_id, profile, mode}

Every response is JSON except the image PNG; anomaly maps travel both as
base64 PNG (visualization) and as the base64 raw float payload, which is
byte-identical to the .bin files the CLI writes for the same inputs.
Pipeline executions are bounded by a configurable number of run slots
(default 2); excess requests queue.
"""

from __future__ import annotations

import base64
import threading
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ValidationError

from .backends.base import BackendSet
from .core import PromptProfile
from .datasets.manifest import DatasetManifest
from .errors import SaaError, TransportError
from .imaging import image_to_png_bytes
from .mapio import SALIENCY_MAGIC, encode_map, map_to_png16
from .pipeline import run
from .profiles import ProfileDocument, ProfileStore, StaleProfileWrite
from .runio import apply_mode

MODE_ALIASES = {"saa": "saa", "saa+": "saa_plus", "saa_plus": "saa_plus"}


class RunRequest(BaseModel):
    image_id: str
    profile: dict[str, Any]
    mode: str


def create_app(
    manifest: DatasetManifest,
    profiles: ProfileStore,
    backends: BackendSet,
    run_slots: int = 2,
) -> FastAPI:
    app = FastAPI(title="saaplus workbench API", docs_url=None, redoc_url=None)
    # the workbench is usually served as static files from another origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    slots = threading.BoundedSemaphore(max(1, run_slots))

    @app.exception_handler(SaaError)
    def _saa_error(_request: Request, exc: SaaError) -> JSONResponse:
        if isinstance(exc, TransportError):
            status = 502
        elif isinstance(exc, StaleProfileWrite):
            status = 409
        else:
            status = 400
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.get("/api/health")
    def health() -> dict:
        return {
            "status": "ok",
            "dataset": manifest.name,
            "images": len(manifest.entries),
            "backends": {
                "generator": backends.generator.descriptor.name,
                "refiner": backends.refiner.descriptor.name,
                "features": backends.features.descriptor.name,
            },
        }

    @app.get("/api/images")
    def list_images() -> dict:
        return {
            "dataset": manifest.name,
            "images": [
                {"id": e.id, "category": e.category, "split": e.split, "is_normal": e.is_normal}
                for e in manifest.entries
            ],
        }

    @app.get("/api/images/{image_id:path}/png")
    def image_png(image_id: str, resolution: int = 400) -> Response:
        try:
            entry = manifest.entry(image_id)
        except KeyError:
            return JSONResponse(status_code=404, content={"error": f"unknown image id {image_id!r}"})
        image = manifest.load_image(entry, resolution)
        return Response(content=image_to_png_bytes(image), media_type="image/png")

    @app.get("/api/profiles")
    def list_profiles() -> dict:
        docs = []
        for profile_id in profiles.list_ids():
            doc = profiles.get(profile_id)
            docs.append({"id": doc.id, "display_name": doc.display_name, "version": doc.version})
        return {"profiles": docs}

    @app.get("/api/profiles/{profile_id}")
    def get_profile(profile_id: str) -> Any:
        try:
            return profiles.get(profile_id).to_json_dict()
        except KeyError:
            return JSONResponse(status_code=404, content={"error": f"unknown profile {profile_id!r}"})

    @app.put("/api/profiles/{profile_id}")
    async def put_profile(profile_id: str, request: Request) -> Any:
        try:
            payload = await request.json()
        except Exception:
            return JSONResponse(status_code=400, content={"error": "body is not valid JSON"})
        document = ProfileDocument.from_json_dict(payload)  # ConfigError -> 400
        if document.id != profile_id:
            return JSONResponse(
                status_code=400,
                content={"error": f"document id {document.id!r} does not match path id {profile_id!r}"},
            )
        stored = profiles.put(document)  # StaleProfileWrite -> 409
        return stored.to_json_dict()

    @app.post("/api/run")
    def run_pipeline(request: dict) -> Any:
        try:
            parsed = RunRequest(**request)
        except ValidationError as exc:
            return JSONResponse(status_code=400, content={"error": f"bad run request: {exc}"})
        if parsed.mode not in MODE_ALIASES:
            return JSONResponse(status_code=400, content={"error": f"unknown mode {parsed.mode!r}"})
        try:
            entry = manifest.entry(parsed.image_id)
        except KeyError:
            return JSONResponse(status_code=404,
                                content={"error": f"unknown image id {parsed.image_id!r}"})

        profile_payload = parsed.profile
        if "profile" in profile_payload:
            profile = ProfileDocument.from_json_dict(profile_payload).profile
        else:
            profile = PromptProfile.from_dict(profile_payload)
        profile = apply_mode(profile, MODE_ALIASES[parsed.mode])

        with slots:
            image = manifest.load_image(entry, profile.working_resolution)
            amap, trace = run(image, profile, backends)  # TransportError -> 502

        map_max = float(amap.values.max())
        saliency_png = None
        if trace.saliency_full is not None:
            saliency_png = base64.b64encode(map_to_png16(trace.saliency_full.values, 2.0)).decode("ascii")
        return {
            "image_id": parsed.image_id,
            "mode": profile.mode,
            "map_max": map_max,
            "stage_counts": trace.stage_counts,
            "trace": trace.to_json_dict(),
            "anomaly_map_raw": base64.b64encode(encode_map(amap.values)).decode("ascii"),
            "anomaly_map_png": base64.b64encode(map_to_png16(amap.values, map_max)).decode("ascii"),
            "saliency_png": saliency_png,
            "saliency_raw": (
                base64.b64encode(encode_map(trace.saliency_full.values, SALIENCY_MAGIC)).decode("ascii")
                if trace.saliency_full is not None
                else None
            ),
        }

    return app
