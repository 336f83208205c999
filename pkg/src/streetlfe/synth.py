"""Analytic scene renderer used as the end-to-end pipeline oracle.

A scene is one horizontal ground plane plus one vertical facade holding a
door rectangle, all with closed-form ray intersections. Rendering yields
a panorama-consistent depth grid, the exact ground-truth door mask, and
panorama metadata, so the full estimation path can be checked against the
known door-bottom elevation with no segmentation model in the loop.

Camera frame: camera at the origin, z up, y along the vehicle heading.
The ground plane sits at z = -camera_height; the facade is vertical at
facade_distance along facade_azimuth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .depth import DepthGrid, save_raw_grid
from .errors import InvalidScene
from .geometry import (
    GeoCoordinate,
    PanoDims,
    PixelCoord,
    azimuth_to_column,
    offset_coordinate,
    pitch_to_row,
    wrap_degrees,
)
from .ingest import PanoAsset
from .masks import SegMask, write_mask_bundle

_CROP_PAD_PX = 3


@dataclass(frozen=True)
class DoorSpec:
    """Door rectangle on the facade plane."""

    center_offset_m: float
    width_m: float
    bottom_elev_m: float
    height_m: float


@dataclass(frozen=True)
class SceneSpec:
    """Complete description of a synthetic scene."""

    camera_height_m: float
    camera_elev_m: float
    ground_elev_m: float
    facade_distance_m: float
    facade_azimuth_deg: float
    door: DoorSpec
    depth_dims: PanoDims
    pano_scale: int = 4
    panorama_id: str = "synth-pano"
    property_id: str = "synth-prop"
    camera: GeoCoordinate = field(default_factory=lambda: GeoCoordinate(29.7601, -95.3701))
    yaw_deg: float = 0.0
    capture_date: str = "2023-01-01"
    noise_amp_m: float = 0.0
    noise_seed: int = 0

    def __post_init__(self):
        if self.camera_height_m <= 0:
            raise InvalidScene("camera_height_m must be positive")
        if self.facade_distance_m <= 0:
            raise InvalidScene("facade_distance_m must be positive")
        if self.door.width_m <= 0 or self.door.height_m <= 0:
            raise InvalidScene("door must have positive width and height")
        if self.door.bottom_elev_m < self.ground_elev_m:
            raise InvalidScene("door bottom cannot sit below the ground plane")
        if abs(self.camera_elev_m - self.camera_height_m - self.ground_elev_m) > 1e-9:
            raise InvalidScene("camera_elev_m must equal ground_elev_m + camera_height_m")
        if self.pano_scale < 1:
            raise InvalidScene("pano_scale must be at least 1")
        if self.noise_amp_m < 0:
            raise InvalidScene("noise_amp_m must be non-negative")

    @property
    def pano_dims(self) -> PanoDims:
        return PanoDims(
            width_px=self.depth_dims.width_px * self.pano_scale,
            height_px=self.depth_dims.height_px * self.pano_scale,
        )

    def to_json_dict(self) -> dict:
        return {
            "camera_height_m": self.camera_height_m,
            "camera_elev_m": self.camera_elev_m,
            "ground_elev_m": self.ground_elev_m,
            "facade_distance_m": self.facade_distance_m,
            "facade_azimuth_deg": self.facade_azimuth_deg,
            "door": {
                "center_offset_m": self.door.center_offset_m,
                "width_m": self.door.width_m,
                "bottom_elev_m": self.door.bottom_elev_m,
                "height_m": self.door.height_m,
            },
            "depth_dims": {
                "width_px": self.depth_dims.width_px,
                "height_px": self.depth_dims.height_px,
            },
            "pano_scale": self.pano_scale,
            "panorama_id": self.panorama_id,
            "property_id": self.property_id,
            "camera_lat": self.camera.lat,
            "camera_lon": self.camera.lon,
            "yaw_deg": self.yaw_deg,
            "capture_date": self.capture_date,
            "noise_amp_m": self.noise_amp_m,
            "noise_seed": self.noise_seed,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SceneSpec":
        door = doc["door"]
        dims = doc["depth_dims"]
        kwargs = {}
        for key in ("pano_scale", "panorama_id", "property_id", "yaw_deg",
                    "capture_date", "noise_amp_m", "noise_seed"):
            if key in doc:
                kwargs[key] = doc[key]
        if "camera_lat" in doc or "camera_lon" in doc:
            kwargs["camera"] = GeoCoordinate(
                lat=float(doc.get("camera_lat", 29.7601)),
                lon=float(doc.get("camera_lon", -95.3701)),
            )
        return cls(
            camera_height_m=float(doc["camera_height_m"]),
            camera_elev_m=float(doc["camera_elev_m"]),
            ground_elev_m=float(doc["ground_elev_m"]),
            facade_distance_m=float(doc["facade_distance_m"]),
            facade_azimuth_deg=float(doc["facade_azimuth_deg"]),
            door=DoorSpec(
                center_offset_m=float(door["center_offset_m"]),
                width_m=float(door["width_m"]),
                bottom_elev_m=float(door["bottom_elev_m"]),
                height_m=float(door["height_m"]),
            ),
            depth_dims=PanoDims(width_px=int(dims["width_px"]), height_px=int(dims["height_px"])),
            **kwargs,
        )


def load_scene(path: Path | str) -> SceneSpec:
    return SceneSpec.from_json_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def save_scene(path: Path | str, spec: SceneSpec) -> None:
    Path(path).write_text(json.dumps(spec.to_json_dict(), indent=2) + "\n", encoding="utf-8")


def _facade_frame(spec: SceneSpec) -> tuple[np.ndarray, np.ndarray]:
    """(inward normal, lateral direction) of the facade plane, unit xy-vectors."""
    az = math.radians(spec.facade_azimuth_deg)
    normal = np.array([math.sin(az), math.cos(az), 0.0])
    lateral = np.array([math.cos(az), -math.sin(az), 0.0])
    return normal, lateral


def _ray_grid(az_rad: np.ndarray, pitch_rad: np.ndarray) -> tuple[np.ndarray, ...]:
    """Broadcast (rows of pitch) x (cols of azimuth) ray components."""
    cos_p = np.cos(pitch_rad)[:, None]
    rx = np.sin(az_rad)[None, :] * cos_p
    ry = np.cos(az_rad)[None, :] * cos_p
    rz = np.broadcast_to(np.sin(pitch_rad)[:, None], (pitch_rad.size, az_rad.size))
    return rx, ry, rz


def _scene_depths(spec: SceneSpec, rx, ry, rz) -> np.ndarray:
    """Nearest positive ray-plane intersection distance; NaN where both miss."""
    normal, _ = _facade_frame(spec)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_ground = np.where(rz < 0, -spec.camera_height_m / rz, np.inf)
        denom = normal[0] * rx + normal[1] * ry
        t_facade = np.where(denom > 0, spec.facade_distance_m / denom, np.inf)
    t = np.minimum(t_ground, t_facade)
    return np.where(np.isfinite(t), t, np.nan)


def render_depth(spec: SceneSpec) -> DepthGrid:
    """Depth grid of the scene, sampled at equirectangular cell centers."""
    gh, gw = spec.depth_dims.height_px, spec.depth_dims.width_px
    az = (np.arange(gw) + 0.5) / gw * 2.0 * np.pi - np.pi
    pitch = np.pi / 2.0 - (np.arange(gh) + 0.5) / gh * np.pi
    depths = _scene_depths(spec, *_ray_grid(az, pitch))
    if spec.noise_amp_m > 0:
        rng = np.random.default_rng(spec.noise_seed)
        noisy = depths + rng.uniform(-spec.noise_amp_m, spec.noise_amp_m, size=depths.shape)
        with np.errstate(invalid="ignore"):
            noisy[noisy <= 0] = np.nan
        depths = noisy
    return DepthGrid(width_px=gw, height_px=gh, values=depths)


def _door_angular_bounds(spec: SceneSpec) -> tuple[float, float, float, float]:
    """(az_min, az_max, pitch_min, pitch_max) of the door rectangle, degrees."""
    fd = spec.facade_distance_m
    u0 = spec.door.center_offset_m - spec.door.width_m / 2.0
    u1 = spec.door.center_offset_m + spec.door.width_m / 2.0
    z0 = spec.door.bottom_elev_m - spec.camera_elev_m
    z1 = z0 + spec.door.height_m
    az0 = spec.facade_azimuth_deg + math.degrees(math.atan2(u0, fd))
    az1 = spec.facade_azimuth_deg + math.degrees(math.atan2(u1, fd))
    rho_candidates = (fd, math.hypot(fd, u0), math.hypot(fd, u1))
    pitches = [math.degrees(math.atan2(z, rho)) for z in (z0, z1) for rho in rho_candidates]
    return az0, az1, min(pitches), max(pitches)


def render_door_mask(spec: SceneSpec) -> SegMask:
    """Exact ground-truth door mask over a tight panorama crop.

    A panorama pixel belongs to the door iff its view ray hits the facade
    inside the door rectangle; the facade is always the nearest hit there.
    """
    dims = spec.pano_dims
    w, h = dims.width_px, dims.height_px
    az0, az1, pitch_min, pitch_max = _door_angular_bounds(spec)
    x0 = math.floor(w / 2.0 + az0 / 360.0 * w) - _CROP_PAD_PX
    x1 = math.ceil(w / 2.0 + az1 / 360.0 * w) + _CROP_PAD_PX
    y0 = max(0, math.floor(pitch_to_row(min(pitch_max, 90.0), dims)) - _CROP_PAD_PX)
    y1 = min(h - 1, math.ceil(pitch_to_row(max(pitch_min, -90.0), dims)) + _CROP_PAD_PX)
    crop_w = min(w, x1 - x0 + 1)
    crop_h = y1 - y0 + 1

    xs = (x0 + np.arange(crop_w)) % w
    ys = y0 + np.arange(crop_h)
    az = xs / w * 2.0 * np.pi - np.pi
    pitch = np.pi / 2.0 - ys / h * np.pi
    rx, ry, rz = _ray_grid(az, pitch)
    normal, lateral = _facade_frame(spec)
    denom = normal[0] * rx + normal[1] * ry
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(denom > 0, spec.facade_distance_m / denom, np.nan)
    px = t * rx
    py = t * ry
    pz = t * rz
    u = px * lateral[0] + py * lateral[1]
    u0 = spec.door.center_offset_m - spec.door.width_m / 2.0
    u1 = spec.door.center_offset_m + spec.door.width_m / 2.0
    z0 = spec.door.bottom_elev_m - spec.camera_elev_m
    z1 = z0 + spec.door.height_m
    bitmap = (
        np.isfinite(t) & (u >= u0) & (u <= u1) & (pz >= z0) & (pz <= z1)
    )
    return SegMask(
        property_id=spec.property_id,
        panorama_id=spec.panorama_id,
        crop_origin=PixelCoord(x=x0 % w, y=y0),
        crop_w=crop_w,
        crop_h=crop_h,
        bitmap=bitmap,
        score=1.0,
        prompt="ground truth",
        model_id="synthetic-renderer",
    )


def scene_asset(spec: SceneSpec) -> PanoAsset:
    import datetime

    return PanoAsset(
        panorama_id=spec.panorama_id,
        dims=spec.pano_dims,
        camera=spec.camera,
        camera_elev_m=spec.camera_elev_m,
        yaw_deg=spec.yaw_deg,
        capture_date=datetime.date.fromisoformat(spec.capture_date),
    )


def render_scene(spec: SceneSpec) -> tuple[DepthGrid, SegMask, PanoAsset]:
    """Render (depth grid, ground-truth door mask, panorama metadata)."""
    return render_depth(spec), render_door_mask(spec), scene_asset(spec)


def analytic_door_bottom_depth(spec: SceneSpec) -> float:
    """Exact camera-to-door-bottom ray length at the door's center column."""
    dz = spec.camera_elev_m - spec.door.bottom_elev_m
    return math.sqrt(
        spec.facade_distance_m**2 + spec.door.center_offset_m**2 + dz**2
    )


def door_bottom_center_pixel(spec: SceneSpec) -> PixelCoord:
    """Panorama pixel looking at the center of the door-bottom line."""
    dims = spec.pano_dims
    fd = spec.facade_distance_m
    off = spec.door.center_offset_m
    az = spec.facade_azimuth_deg + math.degrees(math.atan2(off, fd))
    pitch = math.degrees(
        math.atan2(spec.door.bottom_elev_m - spec.camera_elev_m, math.hypot(fd, off))
    )
    return PixelCoord(x=azimuth_to_column(wrap_degrees(az), dims), y=pitch_to_row(pitch, dims))


def scene_parcel_feature(spec: SceneSpec) -> dict:
    """GeoJSON feature for the scene's property, carrying the true elevation."""
    az0, az1, _, _ = _door_angular_bounds(spec)
    bearing = wrap_degrees(spec.yaw_deg + (az0 + az1) / 2.0)
    distance = math.hypot(spec.facade_distance_m, spec.door.center_offset_m)
    centroid = offset_coordinate(spec.camera, bearing, distance)
    return {
        "type": "Feature",
        "geometry": {
            "type": "Point",
            "coordinates": [round(centroid.lon, 9), round(centroid.lat, 9)],
        },
        "properties": {
            "property_id": spec.property_id,
            "lfe_truth_m": spec.door.bottom_elev_m,
            "front_door_visible": True,
        },
    }


def write_scene_assets(spec: SceneSpec, panos_dir: Path | str, masks_dir: Path | str) -> None:
    """Write the scene's depth grid, panorama metadata, and mask bundle."""
    panos_dir = Path(panos_dir)
    masks_dir = Path(masks_dir)
    panos_dir.mkdir(parents=True, exist_ok=True)
    depth_grid, mask, asset = render_scene(spec)
    save_raw_grid(panos_dir / f"{spec.panorama_id}.depth.bin", depth_grid)
    meta = {
        "panorama_id": asset.panorama_id,
        "width": asset.dims.width_px,
        "height": asset.dims.height_px,
        "lat": asset.camera.lat,
        "lon": asset.camera.lon,
        "camera_elev_m": asset.camera_elev_m,
        "yaw_deg": asset.yaw_deg,
        "capture_date": spec.capture_date,
    }
    (panos_dir / f"{spec.panorama_id}.json").write_text(
        json.dumps(meta, indent=2) + "\n", encoding="utf-8"
    )
    write_mask_bundle([mask], masks_dir / spec.panorama_id, panorama_id=spec.panorama_id)


def write_scene_fixture(spec: SceneSpec, out_dir: Path | str) -> dict[str, Path]:
    """Write a complete single-scene fixture runnable by the estimation command."""
    out_dir = Path(out_dir)
    panos = out_dir / "panos"
    masks = out_dir / "masks"
    write_scene_assets(spec, panos, masks)
    parcels = out_dir / "parcels.geojson"
    collection = {"type": "FeatureCollection", "features": [scene_parcel_feature(spec)]}
    parcels.write_text(json.dumps(collection, indent=2) + "\n", encoding="utf-8")
    save_scene(out_dir / "scene.json", spec)
    return {"parcels": parcels, "panos": panos, "masks": masks}
