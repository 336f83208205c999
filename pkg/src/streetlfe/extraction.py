"""Door-bottom extraction and per-property elevation estimation.

The estimate for a property is the median elevation of its door-bottom
pixels: for every mask column containing door pixels, take the lowest set
pixel, look up its radial depth, convert the pixel row to a pitch angle,
and add depth * sin(pitch) to the camera elevation. Points above
median + k*MAD are rejected before the median (door masks can bleed up
the vertical door edges; those spurious points are always high, never
low, so the filter is one-sided).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import PipelineConfig
from .depth import DepthGrid, sample_depth
from .geometry import PixelCoord, elevation_from_depth, row_to_pitch
from .ingest import PanoAsset
from .masks import SegMask


class UnavailableReason(enum.Enum):
    NO_MASK = "NoMask"
    NO_DOOR_BOTTOM = "NoDoorBottom"
    DEPTH_MISSING = "DepthMissing"


@dataclass(frozen=True)
class ProfilePoint:
    """One door-bottom pixel with its measurements."""

    pano_pixel: PixelCoord
    depth_m: float
    pitch_deg: float
    elevation_m: float


@dataclass(frozen=True)
class DoorBottomProfile:
    """Per-column lowest door pixels of one mask, with depths and elevations.

    Points whose depth lookup returned the NaN sentinel are kept here with
    depth_m NaN so diagnostics can show where depth coverage failed; the
    estimator drops them.
    """

    source_property_id: str
    points: tuple[ProfilePoint, ...]

    def finite_points(self) -> list[ProfilePoint]:
        return [p for p in self.points if math.isfinite(p.depth_m)]


@dataclass(frozen=True)
class LfeRecord:
    """Final per-property result."""

    property_id: str
    reason: UnavailableReason | None
    lfe_m: float | None
    n_points_used: int
    camera_elev_m: float | None
    panorama_id: str | None

    def __post_init__(self):
        if self.reason is None:
            if self.lfe_m is None or not math.isfinite(self.lfe_m):
                raise ValueError("available record requires a finite lfe_m")
            if self.n_points_used < 1:
                raise ValueError("available record requires supporting points")

    @property
    def available(self) -> bool:
        return self.reason is None

    @property
    def status_label(self) -> str:
        if self.reason is None:
            return "Available"
        return f"Unavailable({self.reason.value})"


def extract_door_bottom(mask: SegMask) -> list[tuple[int, int]]:
    """Lowest set pixel of every mask column, as (column, row) in crop coordinates.

    Columns with no set pixel are skipped; an all-zero mask yields [].
    """
    bm = mask.bitmap
    cols = np.flatnonzero(bm.any(axis=0))
    if cols.size == 0:
        return []
    rows = bm.shape[0] - 1 - np.argmax(bm[::-1, :][:, cols], axis=0)
    return [(int(c), int(r)) for c, r in zip(cols, rows)]


def filter_outliers(elevations: Sequence[float], cfg: PipelineConfig) -> list[float]:
    """One-sided robust rejection: drop values above median + k * MAD.

    MAD is floored at cfg.mad_floor_m so runs of identical values still
    reject distant spikes. Values at or below the median always survive,
    so the minimum is never removed. Input order is preserved.
    """
    vals = list(elevations)
    if not vals:
        raise ValueError("elevations must be non-empty")
    arr = np.asarray(vals, dtype=float)
    med = float(np.median(arr))
    mad = float(np.median(np.abs(arr - med)))
    threshold = med + cfg.outlier_k * max(mad, cfg.mad_floor_m)
    return [v for v in vals if v <= threshold]


def door_bottom_profile(mask: SegMask, grid: DepthGrid, asset: PanoAsset) -> DoorBottomProfile:
    """Measure every door-bottom pixel of a mask against the panorama's depth."""
    dims = asset.dims
    mask.validate_within(dims)
    ox, oy = int(mask.crop_origin.x), int(mask.crop_origin.y)
    points = []
    for col, row in extract_door_bottom(mask):
        pixel = PixelCoord(x=(ox + col) % dims.width_px, y=oy + row)
        d = sample_depth(grid, pixel, dims)
        pitch = row_to_pitch(pixel.y, dims)
        elev = (
            elevation_from_depth(d, pitch, asset.camera_elev_m)
            if math.isfinite(d) and d > 0
            else math.nan
        )
        points.append(ProfilePoint(pano_pixel=pixel, depth_m=d, pitch_deg=pitch, elevation_m=elev))
    return DoorBottomProfile(source_property_id=mask.property_id, points=tuple(points))


def select_mask(masks: Sequence[SegMask]) -> SegMask:
    """Highest-score mask; ties break to the largest set-pixel area, then input order."""
    return max(masks, key=lambda m: (m.score, m.area_px))


def estimate_lfe(
    asset: PanoAsset,
    grid: DepthGrid,
    masks: Sequence[SegMask],
    cfg: PipelineConfig,
    property_id: str | None = None,
) -> LfeRecord:
    """Estimate one property's lowest floor elevation from its door masks.

    Never raises for per-property data problems; those become Unavailable
    records so a batch run always completes.
    """
    pid = property_id if property_id is not None else (masks[0].property_id if masks else "")

    def unavailable(reason: UnavailableReason) -> LfeRecord:
        return LfeRecord(
            property_id=pid,
            reason=reason,
            lfe_m=None,
            n_points_used=0,
            camera_elev_m=asset.camera_elev_m,
            panorama_id=asset.panorama_id,
        )

    if not masks:
        return unavailable(UnavailableReason.NO_MASK)
    best = select_mask(masks)
    profile = door_bottom_profile(best, grid, asset)
    if len(profile.points) < cfg.min_points:
        return unavailable(UnavailableReason.NO_DOOR_BOTTOM)
    finite = profile.finite_points()
    if len(finite) < cfg.min_points:
        return unavailable(UnavailableReason.DEPTH_MISSING)
    retained = filter_outliers([p.elevation_m for p in finite], cfg)
    if len(retained) < cfg.min_points:
        return unavailable(UnavailableReason.DEPTH_MISSING)
    return LfeRecord(
        property_id=pid,
        reason=None,
        lfe_m=float(np.median(retained)),
        n_points_used=len(retained),
        camera_elev_m=asset.camera_elev_m,
        panorama_id=asset.panorama_id,
    )
