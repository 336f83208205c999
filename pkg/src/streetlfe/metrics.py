"""Segmentation and estimation metrics: IoU, interpolated AP50, MAE, availability.

AP uses all-point interpolation: detections are ranked by score, each is
greedily matched to the unmatched ground truth with the highest overlap
in its image (true positive iff IoU >= 50%), and the area under the
precision envelope of the resulting recall curve is reported.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyInput, ZeroTotal
from .masks import SegMask


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel-level confusion counts for one pred/gt mask pair."""

    tp: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    def iou_pct(self) -> float:
        denom = self.tp + self.fp + self.fn
        if denom == 0:
            return 100.0
        return 100.0 * self.tp / denom


def confusion_counts(pred: np.ndarray, gt: np.ndarray) -> ConfusionCounts:
    p = np.asarray(pred).astype(bool)
    g = np.asarray(gt).astype(bool)
    if p.shape != g.shape:
        raise DimensionMismatch(f"pred {p.shape} vs gt {g.shape}")
    return ConfusionCounts(
        tp=int(np.count_nonzero(p & g)),
        fp=int(np.count_nonzero(p & ~g)),
        fn=int(np.count_nonzero(~p & g)),
    )


def iou(pred: np.ndarray, gt: np.ndarray) -> float:
    """Intersection over union of two same-shape binary masks, in percent.

    Two empty masks agree vacuously and score 100.
    """
    return confusion_counts(pred, gt).iou_pct()


def mask_pixel_keys(m: SegMask, wrap_width: int | None = None) -> set[int]:
    """Set-pixel coordinates of a crop mask as panorama-space integer keys.

    wrap_width applies the panorama's horizontal wrap; without it, crops
    are compared in unwrapped coordinates (exact whenever the bundles
    share one origin convention).
    """
    rows, cols = np.nonzero(m.bitmap)
    x = int(m.crop_origin.x) + cols.astype(np.int64)
    if wrap_width is not None:
        x %= wrap_width
    y = int(m.crop_origin.y) + rows.astype(np.int64)
    stride = wrap_width if wrap_width is not None else 1 << 32
    return set((y * stride + x).tolist())


def segmask_confusion(a: SegMask, b: SegMask, wrap_width: int | None = None) -> ConfusionCounts:
    """Confusion counts between two crop-based masks in panorama space."""
    sa = mask_pixel_keys(a, wrap_width)
    sb = mask_pixel_keys(b, wrap_width)
    inter = len(sa & sb)
    return ConfusionCounts(tp=inter, fp=len(sa) - inter, fn=len(sb) - inter)


@dataclass(frozen=True)
class Detection:
    """One scored detection; exactly one of mask/box/ref should be set."""

    image_id: str
    score: float
    mask: np.ndarray | None = None
    box: tuple[float, float, float, float] | None = None
    ref: Any = None

    def __post_init__(self):
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ValueError(f"score {self.score!r} outside [0, 1]")


def _box_iou(a: Sequence[float], b: Sequence[float]) -> float:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    iw = max(0.0, min(ax1, bx1) - max(ax0, bx0))
    ih = max(0.0, min(ay1, by1) - max(ay0, by0))
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union if union > 0 else 0.0


def _default_iou(det: Detection, gt: Any) -> float:
    if det.mask is not None:
        c = confusion_counts(det.mask, gt)
        return c.iou_pct() / 100.0
    if det.box is not None:
        return _box_iou(det.box, gt)
    raise TypeError("detection carries neither mask nor box; supply iou_fn")


def ap50(
    detections: Sequence[Detection],
    ground_truths: Mapping[str, Sequence[Any]],
    iou_fn: Callable[[Detection, Any], float] | None = None,
) -> float:
    """Interpolated average precision at the 50% IoU threshold, in percent.

    Score ties keep input order. With no ground truth at all, an empty
    detection list is vacuously perfect (100) and any detection is a
    false positive (0).
    """
    pair_iou = iou_fn or _default_iou
    n_gt = sum(len(v) for v in ground_truths.values())
    if n_gt == 0:
        return 100.0 if not detections else 0.0
    if not detections:
        return 0.0
    order = sorted(range(len(detections)), key=lambda i: -detections[i].score)
    matched: dict[str, set[int]] = {img: set() for img in ground_truths}
    tp_flags = []
    for i in order:
        det = detections[i]
        gts = ground_truths.get(det.image_id, ())
        best_j = -1
        best_iou = 0.0
        for j, gt in enumerate(gts):
            if j in matched.get(det.image_id, set()):
                continue
            v = pair_iou(det, gt)
            if v > best_iou:
                best_iou = v
                best_j = j
        if best_j >= 0 and best_iou >= 0.5:
            matched[det.image_id].add(best_j)
            tp_flags.append(True)
        else:
            tp_flags.append(False)
    tp_cum = np.cumsum(tp_flags)
    ranks = np.arange(1, len(tp_flags) + 1)
    precision = tp_cum / ranks
    recall = tp_cum / n_gt
    # Precision envelope: max precision at any recall >= r.
    mrec = np.concatenate(([0.0], recall))
    mpre = np.concatenate(([0.0], precision))
    for i in range(len(mpre) - 2, -1, -1):
        mpre[i] = max(mpre[i], mpre[i + 1])
    steps = np.nonzero(mrec[1:] != mrec[:-1])[0] + 1
    return float(100.0 * np.sum((mrec[steps] - mrec[steps - 1]) * mpre[steps]))


def mae(pairs: Sequence[tuple[float, float]]) -> float:
    """Mean absolute error over (estimate, truth) pairs, in meters."""
    if not pairs:
        raise EmptyInput("mae needs at least one (estimate, truth) pair")
    return float(np.mean([abs(est - truth) for est, truth in pairs]))


def availability(n_available: int, n_total: int) -> float:
    """Share of properties with an available estimate, in percent."""
    if n_total <= 0:
        raise ZeroTotal("availability needs a positive total")
    if not 0 <= n_available <= n_total:
        raise ValueError(f"n_available {n_available} outside [0, {n_total}]")
    return 100.0 * n_available / n_total


def fps(n_images: int, elapsed_s: float) -> float:
    """Images per second of wall clock; 0 for a degenerate measurement."""
    return n_images / elapsed_s if elapsed_s > 0 else 0.0


class Stopwatch:
    """Wall-clock timer for harness-level throughput reporting."""

    def __init__(self):
        self._t0 = time.perf_counter()

    def elapsed_s(self) -> float:
        return time.perf_counter() - self._t0


@dataclass(frozen=True)
class EvalReport:
    """Aggregated evaluation results; fields not produced by a run stay None."""

    iou_pct: float | None = None
    ap50_pct: float | None = None
    mae_m: float | None = None
    availability_pct: float | None = None
    availability_visible_pct: float | None = None
    fps: float | None = None

    _COLUMNS = (
        ("iou_pct", "IoU (%)", "{:.2f}"),
        ("ap50_pct", "AP50 (%)", "{:.2f}"),
        ("mae_m", "MAE (m)", "{:.4f}"),
        ("availability_pct", "Availability (%)", "{:.2f}"),
        ("availability_visible_pct", "Availability visible (%)", "{:.2f}"),
        ("fps", "FPS", "{:.2f}"),
    )

    def __post_init__(self):
        for name in ("iou_pct", "ap50_pct", "availability_pct", "availability_visible_pct"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 100.0:
                raise ValueError(f"{name} {value} outside [0, 100]")
        if self.mae_m is not None and self.mae_m < 0.0:
            raise ValueError("mae_m must be non-negative")

    def to_json_dict(self) -> dict[str, float]:
        out = {}
        for name, _, fmt in self._COLUMNS:
            value = getattr(self, name)
            if value is not None:
                out[name] = float(fmt.format(value))
        return out

    def to_table(self) -> str:
        """Aligned two-row plain-text table of the populated columns."""
        cells = [
            (header, fmt.format(getattr(self, name)))
            for name, header, fmt in self._COLUMNS
            if getattr(self, name) is not None
        ]
        if not cells:
            return "(empty report)"
        widths = [max(len(h), len(v)) for h, v in cells]
        head = " | ".join(h.ljust(w) for (h, _), w in zip(cells, widths))
        rule = "-+-".join("-" * w for w in widths)
        body = " | ".join(v.rjust(w) for (_, v), w in zip(cells, widths))
        return "\n".join((head, rule, body))
