"""Image loading, resizing and PNG conversion helpers."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .core import ImageRecord
from .errors import ConfigError


def load_image(path: str | Path, image_id: str, category: str, resolution: int) -> ImageRecord:
    """Load an RGB image, resize it to the working resolution, scale to [0, 1]."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            original = (rgb.height, rgb.width)
            if (rgb.height, rgb.width) != (resolution, resolution):
                rgb = rgb.resize((resolution, resolution), Image.BILINEAR)
            pixels = np.asarray(rgb, dtype=np.float64) / 255.0
    except (OSError, SyntaxError) as exc:
        raise ConfigError(f"unreadable image {path}: {exc}") from exc
    return ImageRecord(id=image_id, category=category, pixels=pixels, original_size=original)


def load_mask(path: str | Path, resolution: int) -> np.ndarray:
    """Load a ground-truth mask, binarize (any nonzero pixel -> 1), resize
    by nearest neighbor to the working resolution."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            gray = img.convert("L")
            if (gray.height, gray.width) != (resolution, resolution):
                gray = gray.resize((resolution, resolution), Image.NEAREST)
            return np.asarray(gray) > 0
    except (OSError, SyntaxError) as exc:
        raise ConfigError(f"unreadable mask {path}: {exc}") from exc


def image_to_png_bytes(image: ImageRecord) -> bytes:
    """Encode the working-resolution image as PNG bytes."""
    arr = np.clip(np.round(image.pixels * 255.0), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def png_bytes_to_pixels(data: bytes) -> np.ndarray:
    """Decode PNG bytes to an (h, w, 3) float array in [0, 1]."""
    with Image.open(io.BytesIO(data)) as img:
        return np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
