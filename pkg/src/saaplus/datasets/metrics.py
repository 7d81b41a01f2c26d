"""Pixel-pooled max-F1 at the optimal threshold.

All pixels of all prediction maps in a pool are ranked together; candidate
thresholds are the unique prediction values (evenly spaced quantiles of
them once there are more than the cap); a pixel is predicted positive when
its value >= threshold; the score is the maximum F1 = 2TP/(2TP+FP+FN) over
thresholds.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..core import AnomalyMap
from ..errors import MetricUndefinedError

THRESHOLD_CAP = 1024


def _pool(predictions: Sequence[AnomalyMap | np.ndarray], ground_truths: Sequence[np.ndarray]):
    if len(predictions) != len(ground_truths):
        raise ValueError(
            f"{len(predictions)} predictions but {len(ground_truths)} ground truths"
        )
    preds = []
    gts = []
    for p, g in zip(predictions, ground_truths):
        values = p.values if isinstance(p, AnomalyMap) else np.asarray(p, dtype=np.float64)
        gt = np.asarray(g, dtype=bool)
        if values.shape != gt.shape:
            raise ValueError(f"prediction {values.shape} does not match ground truth {gt.shape}")
        preds.append(values.ravel())
        gts.append(gt.ravel())
    return np.concatenate(preds), np.concatenate(gts)


def candidate_thresholds(pooled: np.ndarray, cap: int = THRESHOLD_CAP) -> np.ndarray:
    """Unique prediction values, subsampled to <= cap evenly spaced quantiles."""
    uniq = np.unique(pooled)
    if uniq.size <= cap:
        return uniq
    idx = np.unique(np.round(np.linspace(0, uniq.size - 1, cap)).astype(int))
    return uniq[idx]


def f1_at_threshold(
    predictions: Sequence[AnomalyMap | np.ndarray],
    ground_truths: Sequence[np.ndarray],
    threshold: float,
) -> float:
    """F1 of the pooled pixels at one fixed threshold (positive: value >= t)."""
    pooled, gt = _pool(predictions, ground_truths)
    positive = pooled >= threshold
    tp = int(np.count_nonzero(positive & gt))
    fp = int(np.count_nonzero(positive & ~gt))
    fn = int(np.count_nonzero(~positive & gt))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def max_f1_pixel(
    predictions: Sequence[AnomalyMap | np.ndarray],
    ground_truths: Sequence[np.ndarray],
    cap: int = THRESHOLD_CAP,
) -> tuple[float, float]:
    """(max pooled F1 over candidate thresholds, the threshold achieving it).

    Among thresholds tied for the maximum, the largest is returned. Raises
    MetricUndefinedError when the pool has no positive ground-truth pixel.
    """
    pooled, gt = _pool(predictions, ground_truths)
    n_pos = int(np.count_nonzero(gt))
    if n_pos == 0:
        raise MetricUndefinedError("no positive ground-truth pixel in the pool")

    order = np.argsort(-pooled, kind="stable")
    sorted_desc = pooled[order]
    gt_desc = gt[order]
    cum_tp = np.cumsum(gt_desc)

    thresholds = candidate_thresholds(pooled, cap)
    # Number of pixels with value >= t, via the ascending view of the pool.
    sorted_asc = sorted_desc[::-1]
    counts = sorted_asc.size - np.searchsorted(sorted_asc, thresholds, side="left")
    tp = np.where(counts > 0, cum_tp[np.maximum(counts - 1, 0)], 0)
    fp = counts - tp
    fn = n_pos - tp
    denom = 2 * tp + fp + fn
    f1 = np.divide(2 * tp, denom, out=np.zeros_like(thresholds, dtype=np.float64), where=denom > 0)

    best = float(f1.max())
    # Largest threshold achieving the maximum.
    best_threshold = float(thresholds[np.flatnonzero(f1 == best)].max())
    return best, best_threshold


def confusion_at_threshold(
    predictions: Sequence[AnomalyMap | np.ndarray],
    ground_truths: Sequence[np.ndarray],
    threshold: float,
) -> dict[str, int]:
    """Pooled TP/FP/FN/TN pixel counts at one threshold."""
    pooled, gt = _pool(predictions, ground_truths)
    positive = pooled >= threshold
    return {
        "tp": int(np.count_nonzero(positive & gt)),
        "fp": int(np.count_nonzero(positive & ~gt)),
        "fn": int(np.count_nonzero(~positive & gt)),
        "tn": int(np.count_nonzero(~positive & ~gt)),
    }


def pool_sizes(ground_truths: Iterable[np.ndarray]) -> dict[str, int]:
    n_pos = 0
    n_total = 0
    for g in ground_truths:
        g = np.asarray(g, dtype=bool)
        n_pos += int(np.count_nonzero(g))
        n_total += g.size
    return {"positive_pixels": n_pos, "total_pixels": n_total}
