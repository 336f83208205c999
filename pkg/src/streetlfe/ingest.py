"""Input preparation: tiles, panorama metadata, parcels, viewpoints, crops.

On-disk layout:

* tiles/{panorama_id}/{row}_{col}.png (or .jpg), each 512x512
* one metadata JSON per panorama: {"panorama_id", "width", "height",
  "lat", "lon", "camera_elev_m", "yaw_deg", "capture_date"}; the matching
  depth payload lives next to it as {panorama_id}.depth.bin (raw grid) or
  {panorama_id}.depth.b64 (base64 text)
* parcels as a GeoJSON FeatureCollection of Points or Polygons carrying a
  property_id and, optionally, lfe_truth_m and front_door_visible
"""

from __future__ import annotations

import datetime
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence
from urllib.request import urlopen

import numpy as np

from .config import PipelineConfig
from .errors import (
    IoFailure,
    MissingId,
    MissingTile,
    NoCandidates,
    ParseError,
    SizeMismatch,
)
from .geometry import (
    GeoCoordinate,
    PanoDims,
    PixelCoord,
    azimuth_from_heading,
    azimuth_to_column,
    bearing_angle,
    great_circle_distance_m,
)

TILE_SIZE = 512


@dataclass(frozen=True)
class PanoAsset:
    """One panorama's geometry and capture metadata (pixels live elsewhere)."""

    panorama_id: str
    dims: PanoDims
    camera: GeoCoordinate
    camera_elev_m: float
    yaw_deg: float
    capture_date: datetime.date

    def __post_init__(self):
        if not math.isfinite(self.camera_elev_m):
            raise ValueError("camera_elev_m must be finite")
        if not math.isfinite(self.yaw_deg):
            raise ValueError("yaw_deg must be finite")
        object.__setattr__(self, "yaw_deg", self.yaw_deg % 360.0)


@dataclass(frozen=True)
class Parcel:
    """A property: its id, a representative coordinate, optional evaluation fields."""

    property_id: str
    centroid: GeoCoordinate
    lfe_truth_m: float | None = None
    front_door_visible: bool | None = None


@dataclass(frozen=True)
class CropRegion:
    """Axis-aligned crop of a panorama; horizontal extent wraps modulo the width."""

    origin: PixelCoord
    width_px: int
    height_px: int

    def center_column(self, dims: PanoDims) -> float:
        return (self.origin.x + self.width_px / 2.0) % dims.width_px


def stitch_tiles(
    tiles: Mapping[tuple[int, int], np.ndarray], rows: int, cols: int
) -> np.ndarray:
    """Concatenate a complete rows x cols grid of 512x512 tiles into one image.

    Output pixel (r*512 + i, c*512 + j) equals tile (r, c) pixel (i, j).
    """
    missing = [(r, c) for r in range(rows) for c in range(cols) if (r, c) not in tiles]
    if missing:
        raise MissingTile(missing)
    for key, tile in tiles.items():
        if tile.shape[:2] != (TILE_SIZE, TILE_SIZE):
            raise SizeMismatch(f"tile {key} is {tile.shape[:2]}, expected {TILE_SIZE}x{TILE_SIZE}")
    sample = tiles[(0, 0)]
    out_shape = (rows * TILE_SIZE, cols * TILE_SIZE) + sample.shape[2:]
    out = np.empty(out_shape, dtype=sample.dtype)
    for (r, c), tile in tiles.items():
        out[r * TILE_SIZE : (r + 1) * TILE_SIZE, c * TILE_SIZE : (c + 1) * TILE_SIZE] = tile
    return out


def load_tile_dir(directory: Path | str) -> tuple[dict[tuple[int, int], np.ndarray], int, int]:
    """Read {row}_{col}.png/.jpg tiles from a directory; grid size from max indices."""
    from PIL import Image

    directory = Path(directory)
    tiles: dict[tuple[int, int], np.ndarray] = {}
    for path in sorted(directory.iterdir()):
        if path.suffix.lower() not in (".png", ".jpg", ".jpeg"):
            continue
        try:
            r_str, c_str = path.stem.split("_")
            key = (int(r_str), int(c_str))
        except ValueError as exc:
            raise ParseError(f"tile name {path.name} is not row_col") from exc
        with Image.open(path) as img:
            tiles[key] = np.asarray(img)
    if not tiles:
        raise ParseError(f"no tiles in {directory}")
    rows = max(k[0] for k in tiles) + 1
    cols = max(k[1] for k in tiles) + 1
    return tiles, rows, cols


def fetch_tiles(
    url_template: str,
    panorama_id: str,
    rows: int,
    cols: int,
    dest_dir: Path | str,
    api_key: str | None = None,
    concurrency: int = 4,
) -> list[Path]:
    """Download a tile grid into the on-disk layout (opt-in network path).

    url_template is formatted with panorama_id, row, col, and api_key.
    Tiles land in dest_dir/{row}_{col}.jpg.
    """
    dest_dir = Path(dest_dir)
    dest_dir.mkdir(parents=True, exist_ok=True)

    def fetch_one(rc: tuple[int, int]) -> Path:
        r, c = rc
        url = url_template.format(panorama_id=panorama_id, row=r, col=c, api_key=api_key or "")
        out = dest_dir / f"{r}_{c}.jpg"
        try:
            with urlopen(url) as resp:
                out.write_bytes(resp.read())
        except OSError as exc:
            raise IoFailure(f"fetching {url}: {exc}") from exc
        return out

    coords = [(r, c) for r in range(rows) for c in range(cols)]
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        return list(pool.map(fetch_one, coords))


def select_viewpoint(parcel: Parcel, candidates: Sequence[PanoAsset]) -> str:
    """Panorama giving the best view of a property: the nearest camera.

    Distance ties go to the most recent capture, then the smallest
    panorama_id, so the choice is independent of candidate order.
    """
    if not candidates:
        raise NoCandidates(f"no panoramas offered for {parcel.property_id}")
    best = min(
        candidates,
        key=lambda a: (
            great_circle_distance_m(a.camera, parcel.centroid),
            -a.capture_date.toordinal(),
            a.panorama_id,
        ),
    )
    return best.panorama_id


def crop_building(asset: PanoAsset, parcel: Parcel, cfg: PipelineConfig) -> CropRegion:
    """Crop window around a property: centered on its azimuth, on the horizon row.

    Buildings sit near pitch 0, so the window is vertically centered on
    H/2 with height v_frac*H and spans fov_deg of azimuth.
    """
    dims = asset.dims
    bearing = bearing_angle(asset.camera, parcel.centroid)
    azimuth = azimuth_from_heading(bearing, asset.yaw_deg)
    center_x = azimuth_to_column(azimuth, dims)
    width = int(round(cfg.fov_deg / 360.0 * dims.width_px))
    height = int(round(cfg.v_frac * dims.height_px))
    origin_x = (center_x - width / 2.0) % dims.width_px
    origin_y = dims.height_px / 2.0 - height / 2.0
    return CropRegion(origin=PixelCoord(x=origin_x, y=origin_y), width_px=width, height_px=height)


def _feature_centroid(geometry: dict) -> GeoCoordinate:
    gtype = geometry.get("type")
    coords = geometry.get("coordinates")
    if gtype == "Point":
        lon, lat = coords[0], coords[1]
        return GeoCoordinate(lat=float(lat), lon=float(lon))
    if gtype == "Polygon":
        ring = coords[0]
        pts = [(float(lon), float(lat)) for lon, lat in (p[:2] for p in ring)]
        if pts[0] == pts[-1]:
            pts = pts[:-1]
        if len(pts) < 3:
            raise ParseError("polygon ring has fewer than 3 distinct vertices")
        # Shoelace area centroid of the outer ring; holes are ignored.
        area2 = 0.0
        cx = 0.0
        cy = 0.0
        for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
            cross = x0 * y1 - x1 * y0
            area2 += cross
            cx += (x0 + x1) * cross
            cy += (y0 + y1) * cross
        if abs(area2) < 1e-18:
            cx = sum(p[0] for p in pts) / len(pts)
            cy = sum(p[1] for p in pts) / len(pts)
        else:
            cx /= 3.0 * area2
            cy /= 3.0 * area2
        return GeoCoordinate(lat=cy, lon=cx)
    raise ParseError(f"unsupported geometry type {gtype!r}")


def load_parcels(path: Path | str) -> list[Parcel]:
    """Read parcels from a GeoJSON FeatureCollection, preserving feature order."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError(f"{path}: expected a GeoJSON FeatureCollection")
    parcels = []
    for feature in doc.get("features", []):
        props = feature.get("properties") or {}
        pid = props.get("property_id")
        if pid is None:
            raise MissingId(f"{path}: feature without property_id")
        try:
            centroid = _feature_centroid(feature.get("geometry") or {})
        except (TypeError, IndexError, KeyError) as exc:
            raise ParseError(f"{path}: bad geometry for {pid}: {exc}") from exc
        truth = props.get("lfe_truth_m")
        visible = props.get("front_door_visible")
        parcels.append(
            Parcel(
                property_id=str(pid),
                centroid=centroid,
                lfe_truth_m=float(truth) if truth is not None else None,
                front_door_visible=bool(visible) if visible is not None else None,
            )
        )
    return parcels


def load_pano_metadata(path: Path | str) -> PanoAsset:
    """Read one panorama metadata JSON into a PanoAsset."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        return PanoAsset(
            panorama_id=str(doc["panorama_id"]),
            dims=PanoDims(width_px=int(doc["width"]), height_px=int(doc["height"])),
            camera=GeoCoordinate(lat=float(doc["lat"]), lon=float(doc["lon"])),
            camera_elev_m=float(doc["camera_elev_m"]),
            yaw_deg=float(doc["yaw_deg"]),
            capture_date=datetime.date.fromisoformat(str(doc["capture_date"])),
        )
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class PanoSource:
    """A panorama plus the path of its depth payload, if present."""

    asset: PanoAsset
    depth_path: Path | None


def scan_pano_dir(directory: Path | str) -> dict[str, PanoSource]:
    """Load every panorama metadata JSON under a directory.

    Depth payloads are discovered by name: {panorama_id}.depth.bin wins
    over {panorama_id}.depth.b64.
    """
    directory = Path(directory)
    sources: dict[str, PanoSource] = {}
    for path in sorted(directory.glob("*.json")):
        asset = load_pano_metadata(path)
        depth_path = None
        for suffix in (".depth.bin", ".depth.b64"):
            candidate = directory / f"{asset.panorama_id}{suffix}"
            if candidate.is_file():
                depth_path = candidate
                break
        sources[asset.panorama_id] = PanoSource(asset=asset, depth_path=depth_path)
    return sources
