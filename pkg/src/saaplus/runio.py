"""Batch run output: per-image map binaries, PNGs, traces and the summary.

A run over a manifest writes, per image, `<id>.bin` (raw float map),
`<id>.png` (16-bit visualization scaled by the run-wide max) and
`<id>.trace.json`, plus one `summary.json`. Everything is a pure function
of (images, profile, fixtures), so rerunning into the same directory
overwrites every file with identical bytes.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from .backends.base import BackendSet
from .core import AnomalyMap, PromptProfile
from .datasets.evaluate import profile_hash
from .datasets.manifest import DatasetManifest
from .mapio import canonical_json, encode_map, map_to_png16, write_map
from .pipeline import PipelineTrace, run


def sanitize_id(image_id: str) -> str:
    return image_id.replace("/", "__")


def apply_mode(profile: PromptProfile, mode: str | None) -> PromptProfile:
    if mode is None or mode == profile.mode:
        return profile
    return replace(profile, mode=mode)


def run_image(
    manifest: DatasetManifest,
    image_id: str,
    profile: PromptProfile,
    backends: BackendSet,
) -> tuple[AnomalyMap, PipelineTrace]:
    entry = manifest.entry(image_id)
    image = manifest.load_image(entry, profile.working_resolution)
    return run(image, profile, backends)


def run_dataset(
    manifest: DatasetManifest,
    profile: PromptProfile,
    backends: BackendSet,
    out_dir: str | Path,
    verbose: bool = False,
) -> dict:
    """Run every manifest image, write the output tree, return the summary."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    results: list[tuple[str, AnomalyMap, PipelineTrace]] = []
    for entry in manifest.entries:
        if verbose:
            print(f"  running {entry.id}")
        image = manifest.load_image(entry, profile.working_resolution)
        amap, trace = run(image, profile, backends)
        results.append((entry.id, amap, trace))

    scale_max = max((float(amap.values.max()) for _, amap, _ in results), default=0.0)

    summary_images = []
    for image_id, amap, trace in results:
        sid = sanitize_id(image_id)
        write_map(out_dir / f"{sid}.bin", amap.values)
        (out_dir / f"{sid}.png").write_bytes(map_to_png16(amap.values, scale_max))
        (out_dir / f"{sid}.trace.json").write_text(canonical_json(trace.to_json_dict()))
        summary_images.append(
            {
                "id": image_id,
                "file_stem": sid,
                "map_max": float(amap.values.max()),
                "stage_counts": trace.stage_counts,
            }
        )

    summary = {
        "dataset": manifest.name,
        "mode": profile.mode,
        "ablation_drops": sorted(profile.ablation_drops),
        "profile_hash": profile_hash(profile),
        "scale_max": scale_max,
        "image_count": len(summary_images),
        "images": summary_images,
    }
    (out_dir / "summary.json").write_text(canonical_json(summary))
    return summary


def read_predictions(pred_dir: str | Path, manifest: DatasetManifest) -> tuple[dict[str, bytes], list[str]]:
    """Raw .bin payloads per image id, plus the ids with no prediction file."""
    pred_dir = Path(pred_dir)
    found: dict[str, bytes] = {}
    missing: list[str] = []
    for entry in manifest.entries:
        path = pred_dir / f"{sanitize_id(entry.id)}.bin"
        if path.exists():
            found[entry.id] = path.read_bytes()
        else:
            missing.append(entry.id)
    return found, missing


def encode_anomaly_map(amap: AnomalyMap) -> bytes:
    return encode_map(amap.values)
