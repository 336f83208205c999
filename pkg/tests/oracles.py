"""Independent reference implementations used to check the package.

Everything here is deliberately written the slow, literal way (scalar
loops, explicit scans) and shares no code with the package internals.
"""

import math

import numpy as np

from streetlfe.depth import PlaneSet
from streetlfe.metrics import Detection


def reference_depths(planes: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Per-pixel ray/plane intersection distances via scalar trig."""
    h, w = idx.shape
    out = np.full((h, w), np.nan)
    for i in range(h):
        pitch = math.pi / 2 - (i + 0.5) / h * math.pi
        for j in range(w):
            k = int(idx[i, j])
            if k == 0:
                continue
            az = (j + 0.5) / w * 2 * math.pi - math.pi
            ray = (
                math.sin(az) * math.cos(pitch),
                math.cos(az) * math.cos(pitch),
                math.sin(pitch),
            )
            nx, ny, nz, d = (float(v) for v in planes[k])
            denom = nx * ray[0] + ny * ray[1] + nz * ray[2]
            if denom == 0:
                continue
            t = d / denom
            if math.isfinite(t) and t > 0:
                out[i, j] = t
    return out


def random_plane_set(rng: np.random.Generator, width: int = 16, height: int = 8) -> PlaneSet:
    n_real = int(rng.integers(1, 5))
    planes = [np.array([0, 0, 1, 0], dtype=np.float32)]
    for _ in range(n_real):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        planes.append(np.array([*v, rng.uniform(0.5, 30.0)], dtype=np.float32))
    idx = rng.integers(0, n_real + 1, size=(height, width)).astype(np.uint8)
    return PlaneSet(planes=np.stack(planes), index_grid=idx)


def brute_force_door_bottom(bitmap: np.ndarray) -> list[tuple[int, int]]:
    """Literal per-column scan for the lowest set pixel."""
    points = []
    h, w = bitmap.shape
    for col in range(w):
        best = None
        for row in range(h):
            if bitmap[row, col]:
                best = row
        if best is not None:
            points.append((col, best))
    return points


def random_blob(rng: np.random.Generator, h: int = 24, w: int = 24) -> np.ndarray:
    """Union of a few random rectangles plus salt noise."""
    bm = np.zeros((h, w), dtype=bool)
    for _ in range(int(rng.integers(0, 4))):
        y0, x0 = int(rng.integers(0, h)), int(rng.integers(0, w))
        y1, x1 = int(rng.integers(y0, h)), int(rng.integers(x0, w))
        bm[y0 : y1 + 1, x0 : x1 + 1] = True
    bm |= rng.random((h, w)) < 0.05
    return bm


def brute_force_ap50(detections, gts_by_image, iou_fn) -> float:
    """Ranked greedy matching, then the interpolated area under the
    precision/recall points with a literal max-over-tail scan."""
    n_gt = sum(len(v) for v in gts_by_image.values())
    if n_gt == 0:
        return 100.0 if not detections else 0.0
    if not detections:
        return 0.0
    order = sorted(range(len(detections)), key=lambda i: -detections[i].score)
    used = {img: [False] * len(gts) for img, gts in gts_by_image.items()}
    points = []
    tp = 0
    for rank, i in enumerate(order, start=1):
        det = detections[i]
        gts = gts_by_image.get(det.image_id, [])
        best, best_v = -1, 0.0
        for j, gt in enumerate(gts):
            if used[det.image_id][j]:
                continue
            v = iou_fn(det, gt)
            if v > best_v:
                best, best_v = j, v
        if best >= 0 and best_v >= 0.5:
            used[det.image_id][best] = True
            tp += 1
        points.append((tp / n_gt, tp / rank))
    levels = sorted({r for r, _ in points})
    ap = 0.0
    prev = 0.0
    for level in levels:
        if level == 0.0:
            prev = 0.0
            continue
        p_interp = max(p for r, p in points if r >= level)
        ap += (level - prev) * p_interp
        prev = level
    return 100.0 * ap


def random_detection_set(rng: np.random.Generator, max_dets: int = 7, max_gts: int = 5):
    """Small boxes-based detection problem with partial overlaps."""
    n_images = int(rng.integers(1, 3))
    images = [f"img{i}" for i in range(n_images)]
    gts = {}
    for img in images:
        boxes = []
        for _ in range(int(rng.integers(0, max_gts))):
            a = sorted(rng.uniform(0, 10, 2))
            b = sorted(rng.uniform(0, 10, 2))
            boxes.append((a[0], b[0], a[1] + 0.1, b[1] + 0.1))
        gts[img] = boxes
    dets = []
    for _ in range(int(rng.integers(0, max_dets))):
        img = images[int(rng.integers(0, n_images))]
        if gts[img] and rng.random() < 0.6:
            x0, y0, x1, y1 = gts[img][int(rng.integers(0, len(gts[img])))]
            jitter = rng.uniform(-1.0, 1.0, 4)
            box = (x0 + jitter[0], y0 + jitter[1], x1 + jitter[2], y1 + jitter[3])
            box = (
                min(box[0], box[2] - 0.1),
                min(box[1], box[3] - 0.1),
                max(box[2], box[0] + 0.1),
                max(box[3], box[1] + 0.1),
            )
        else:
            a = sorted(rng.uniform(0, 10, 2))
            b = sorted(rng.uniform(0, 10, 2))
            box = (a[0], b[0], a[1] + 0.1, b[1] + 0.1)
        dets.append(Detection(image_id=img, score=float(rng.uniform(0, 1)), box=box))
    return dets, gts
