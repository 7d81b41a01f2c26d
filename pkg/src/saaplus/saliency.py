"""kNN self-similarity saliency and the per-region exponential prompts.

A pixel (grid cell) is salient when its feature is far, in cosine distance,
from its nearest neighbors among all other cells of the same image: the
saliency value is the mean of (1 - cosine similarity) over the N nearest
neighbors, which lands in [0, 2]. Regions then receive exp(mean saliency
under their mask) in [1, e^2], used to recalibrate detector confidences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RegionCandidate, SaliencyMap


@dataclass(frozen=True)
class FeatureGrid:
    """Unit-normalized feature vectors on a (gh, gw) grid."""

    vectors: np.ndarray  # (gh, gw, d)

    def __post_init__(self) -> None:
        v = self.vectors
        if v.ndim != 3:
            raise ValueError(f"feature grid must be (gh, gw, d), got {v.shape}")
        if v.shape[0] * v.shape[1] < 2:
            raise ValueError("feature grid needs at least 2 cells")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature grid contains non-finite values")
        norms = np.linalg.norm(v, axis=2)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValueError("feature vectors must be unit-normalized")

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(int(s) for s in self.vectors.shape)  # type: ignore[return-value]


def saliency_map(features: FeatureGrid, n_neighbors: int) -> SaliencyMap:
    """Mean cosine distance from each cell to its nearest neighbor cells.

    The cell's own feature is excluded from its neighbor set. The neighbor
    count is clamped to (cells - 1) so a large configured N still works on
    small grids.
    """
    if n_neighbors < 1:
        raise ValueError(f"n_neighbors must be >= 1, got {n_neighbors}")
    gh, gw, _ = features.shape
    cells = gh * gw
    if cells < 2:
        raise ValueError("saliency is undefined on a single-cell grid")
    n_eff = min(n_neighbors, cells - 1)

    flat = features.vectors.reshape(cells, -1)
    sims = flat @ flat.T
    # Below any real cosine similarity, so the self cell is never selected.
    np.fill_diagonal(sims, -2.0)
    top = np.sort(sims, axis=1)[:, ::-1][:, :n_eff]
    values = np.mean(1.0 - top, axis=1).reshape(gh, gw)
    return SaliencyMap(np.clip(values, 0.0, 2.0))


def upsample_saliency(saliency: SaliencyMap, height: int, width: int) -> SaliencyMap:
    """Bilinear, corner-aligned upsampling of a grid-resolution map."""
    gh, gw = saliency.shape
    if height < gh or width < gw:
        raise ValueError(f"target {height}x{width} smaller than grid {gh}x{gw}")
    if (height, width) == (gh, gw):
        return saliency
    grid = saliency.values
    ys = np.linspace(0.0, gh - 1.0, height) if gh > 1 else np.zeros(height)
    xs = np.linspace(0.0, gw - 1.0, width) if gw > 1 else np.zeros(width)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, gh - 1)
    x1 = np.minimum(x0 + 1, gw - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    out = (
        grid[np.ix_(y0, x0)] * (1.0 - wy) * (1.0 - wx)
        + grid[np.ix_(y0, x1)] * (1.0 - wy) * wx
        + grid[np.ix_(y1, x0)] * wy * (1.0 - wx)
        + grid[np.ix_(y1, x1)] * wy * wx
    )
    return SaliencyMap(np.clip(out, 0.0, 2.0))


def saliency_prompts(saliency: SaliencyMap, candidates: list[RegionCandidate]) -> list[float]:
    """exp(mean saliency under each candidate mask), one value per candidate."""
    values = saliency.values
    prompts: list[float] = []
    for cand in candidates:
        if cand.mask.shape != values.shape:
            raise ValueError(
                f"candidate mask {cand.mask.shape} does not match saliency {values.shape}"
            )
        mask = cand.mask.astype(bool)
        covered = int(np.count_nonzero(mask))
        if covered == 0:
            raise ValueError(f"empty mask for candidate {cand.phrase!r}")
        prompts.append(float(np.exp(values[mask].sum() / covered)))
    return prompts
