"""Binary mask geometry and the text run-length encoding.

Conventions used everywhere in this package: masks are 2-D boolean numpy
arrays indexed [y, x] with origin at the top-left; boxes are (x0, y0, x1, y1)
pixel tuples, half-open (x0 inclusive, x1 exclusive).

The RLE text form is "<height> <width>" followed by alternating run lengths
over the row-major scan, starting with the count of zeros. Runs always sum
to height*width, so "4 4 16" is the empty 4x4 mask and "4 4 0 16" the full
one.
"""

from __future__ import annotations

import numpy as np


def mask_area(mask: np.ndarray) -> int:
    """Number of set pixels in a binary mask."""
    return int(np.count_nonzero(mask))


def overlap(candidate: np.ndarray, object_mask: np.ndarray, measure: str = "containment") -> float:
    """Overlap between a candidate mask and the inspected-object mask.

    measure="iou" is |c & o| / |c | o|; measure="containment" is
    |c & o| / |c|, i.e. the fraction of the candidate lying inside the
    object. Both return 0.0 when the relevant denominator is empty.
    """
    if candidate.shape != object_mask.shape:
        raise ValueError(
            f"mask shape mismatch: candidate {candidate.shape} vs object {object_mask.shape}"
        )
    c = candidate.astype(bool)
    o = object_mask.astype(bool)
    inter = int(np.count_nonzero(c & o))
    if measure == "iou":
        union = int(np.count_nonzero(c | o))
        return inter / union if union else 0.0
    if measure == "containment":
        ca = int(np.count_nonzero(c))
        return inter / ca if ca else 0.0
    raise ValueError(f"unknown overlap measure: {measure!r}")


def rasterize_box(box: tuple[int, int, int, int], height: int, width: int) -> np.ndarray:
    """Dense mask with exactly the half-open box interior set."""
    x0, y0, x1, y1 = box
    mask = np.zeros((height, width), dtype=bool)
    mask[y0:y1, x0:x1] = True
    return mask


def encode_rle(mask: np.ndarray) -> str:
    """Encode a binary mask to the text RLE form."""
    h, w = mask.shape
    flat = np.asarray(mask, dtype=bool).ravel()
    runs: list[int] = []
    if flat.size == 0:
        return f"{h} {w}"
    edges = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], edges, [flat.size]))
    lengths = np.diff(bounds)
    if flat[0]:
        runs.append(0)  # scan starts with a run of ones: emit a zero-length zero run
    runs.extend(int(n) for n in lengths)
    return " ".join([str(h), str(w)] + [str(r) for r in runs])


def decode_rle(text: str) -> np.ndarray:
    """Decode the text RLE form back to a boolean mask."""
    parts = text.split()
    if len(parts) < 2:
        raise ValueError(f"RLE too short: {text!r}")
    try:
        nums = [int(p) for p in parts]
    except ValueError as exc:
        raise ValueError(f"RLE contains a non-integer token: {text!r}") from exc
    h, w, runs = nums[0], nums[1], nums[2:]
    if h < 0 or w < 0 or any(r < 0 for r in runs):
        raise ValueError(f"RLE contains a negative value: {text!r}")
    total = sum(runs)
    if total != h * w:
        raise ValueError(f"RLE runs sum to {total}, expected {h * w}")
    flat = np.zeros(h * w, dtype=bool)
    pos = 0
    value = False
    for run in runs:
        if value:
            flat[pos : pos + run] = True
        pos += run
        value = not value
    return flat.reshape(h, w)
