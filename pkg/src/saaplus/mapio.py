"""On-disk formats for anomaly and saliency maps.

Binary form: one ASCII header line "SAA+MAP1 <height> <width>\n" (or
"SAA+SAL1" for saliency), followed by row-major little-endian float32.
Visualization form: 16-bit grayscale PNG, values scaled against a supplied
maximum (the max over all maps of the emitting run) so one run shares one
gray scale.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np
from PIL import Image

MAP_MAGIC = "SAA+MAP1"
SALIENCY_MAGIC = "SAA+SAL1"


def encode_map(values: np.ndarray, magic: str = MAP_MAGIC) -> bytes:
    h, w = values.shape
    header = f"{magic} {h} {w}\n".encode("ascii")
    return header + values.astype("<f4").tobytes(order="C")


def decode_map(data: bytes, magic: str = MAP_MAGIC) -> np.ndarray:
    newline = data.find(b"\n")
    if newline < 0:
        raise ValueError("map payload has no header line")
    header = data[:newline].decode("ascii", errors="replace").split()
    if len(header) != 3 or header[0] != magic:
        raise ValueError(f"bad map header {header!r}, expected {magic!r}")
    h, w = int(header[1]), int(header[2])
    body = data[newline + 1 :]
    expected = h * w * 4
    if len(body) != expected:
        raise ValueError(f"map payload holds {len(body)} bytes, expected {expected}")
    return np.frombuffer(body, dtype="<f4").reshape(h, w).astype(np.float64)


def write_map(path: str | Path, values: np.ndarray, magic: str = MAP_MAGIC) -> None:
    Path(path).write_bytes(encode_map(values, magic))


def read_map(path: str | Path, magic: str = MAP_MAGIC) -> np.ndarray:
    return decode_map(Path(path).read_bytes(), magic)


def map_to_png16(values: np.ndarray, scale_max: float) -> bytes:
    """Render a score field to 16-bit grayscale PNG, white = scale_max."""
    denom = scale_max if scale_max > 0 else 1.0
    scaled = np.clip(values / denom, 0.0, 1.0)
    arr = np.round(scaled * 65535.0).astype(np.uint16)
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")  # uint16 -> I;16 grayscale
    return buf.getvalue()


def canonical_json(payload: dict) -> str:
    """Stable JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(payload, sort_keys=True, separators=(",", ": "), indent=1) + "\n"
