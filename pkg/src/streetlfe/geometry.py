"""Angular and geodesic math for full-sphere equirectangular panoramas.

Conventions used throughout the package:

* azimuth: horizontal angle relative to the capture vehicle heading,
  positive clockwise (to the right), range [-180, 180); the panorama's
  center column looks along the heading.
* pitch: vertical angle, 0 at the horizon, +90 straight up, -90 straight
  down.
* 3-vectors: x right, y forward along the heading, z up.

All public angles are degrees; radians never cross a function boundary.
Pixel coordinates are real-valued; quantization happens only at grid
lookups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry, InvalidDepth, OutOfBounds

EARTH_RADIUS_M = 6_371_008.8  # mean sphere radius

_COINCIDENT_EPS_DEG = 1e-9


def wrap_degrees(angle: float) -> float:
    """Wrap an angle into [-180, 180)."""
    return (angle + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class GeoCoordinate:
    """Latitude/longitude in decimal degrees; longitude normalized to [-180, 180)."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and -90.0 <= self.lat <= 90.0):
            raise ValueError(f"latitude {self.lat!r} outside [-90, 90]")
        if not math.isfinite(self.lon):
            raise ValueError(f"longitude {self.lon!r} is not finite")
        object.__setattr__(self, "lon", wrap_degrees(self.lon))


@dataclass(frozen=True)
class SphericalDirection:
    """View direction relative to the vehicle heading."""

    azimuth_deg: float
    pitch_deg: float

    def __post_init__(self):
        if not (math.isfinite(self.azimuth_deg) and -180.0 <= self.azimuth_deg <= 180.0):
            raise ValueError(f"azimuth {self.azimuth_deg!r} outside [-180, 180]")
        if not (math.isfinite(self.pitch_deg) and -90.0 <= self.pitch_deg <= 90.0):
            raise ValueError(f"pitch {self.pitch_deg!r} outside [-90, 90]")


@dataclass(frozen=True)
class PanoDims:
    """Dimensions of a full-sphere equirectangular image (width spans 360 deg)."""

    width_px: int
    height_px: int

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError("panorama dimensions must be positive")
        if self.width_px != 2 * self.height_px:
            raise ValueError(
                f"{self.width_px}x{self.height_px}: full-sphere width must be twice the height"
            )


@dataclass(frozen=True)
class PixelCoord:
    """Sub-pixel image position; x is the column index, y the row index."""

    x: float
    y: float


def bearing_angle(camera: GeoCoordinate, prop: GeoCoordinate) -> float:
    """Initial great-circle bearing from the camera to the property, degrees from North.

    Result is normalized to [-180, 180). Raises DegenerateGeometry when the
    two coordinates coincide within 1e-9 degrees.
    """
    dlat = prop.lat - camera.lat
    dlon = wrap_degrees(prop.lon - camera.lon)
    if abs(dlat) < _COINCIDENT_EPS_DEG and abs(dlon) < _COINCIDENT_EPS_DEG:
        raise DegenerateGeometry(f"camera and property coincide at {camera}")
    lat_c = math.radians(camera.lat)
    lat_p = math.radians(prop.lat)
    dlon_r = math.radians(dlon)
    x = math.sin(dlon_r) * math.cos(lat_p)
    y = math.cos(lat_c) * math.sin(lat_p) - math.sin(lat_c) * math.cos(lat_p) * math.cos(dlon_r)
    return wrap_degrees(math.degrees(math.atan2(x, y)))


def azimuth_from_heading(bearing_deg: float, yaw_deg: float) -> float:
    """Azimuth of a target relative to the vehicle heading, wrapped into [-180, 180)."""
    if not (math.isfinite(bearing_deg) and math.isfinite(yaw_deg)):
        raise ValueError("bearing and yaw must be finite")
    return wrap_degrees(bearing_deg - yaw_deg)


def azimuth_to_column(azimuth_deg: float, dims: PanoDims) -> float:
    """Panorama column looking along the given azimuth.

    Sub-pixel result in [0, W); both +180 and -180 land on the seam column 0.
    """
    w = dims.width_px
    return (w / 2.0 + azimuth_deg / 180.0 * (w / 2.0)) % w


def column_to_azimuth(x: float, dims: PanoDims) -> float:
    """Azimuth of a panorama column; exact inverse of azimuth_to_column on [0, W)."""
    w = dims.width_px
    if not 0.0 <= x < w:
        raise OutOfBounds(f"column {x} outside [0, {w})")
    return x / w * 360.0 - 180.0


def row_to_pitch(y: float, dims: PanoDims) -> float:
    """Pitch of a panorama row: +90 at row 0, -90 at row H."""
    h = dims.height_px
    if not 0.0 <= y <= h:
        raise OutOfBounds(f"row {y} outside [0, {h}]")
    return (h / 2.0 - y) * (180.0 / h)


def pitch_to_row(pitch_deg: float, dims: PanoDims) -> float:
    """Panorama row looking at the given pitch; inverse of row_to_pitch."""
    if not -90.0 <= pitch_deg <= 90.0:
        raise OutOfBounds(f"pitch {pitch_deg} outside [-90, 90]")
    h = dims.height_px
    return h / 2.0 - pitch_deg * (h / 180.0)


def elevation_from_depth(depth_m: float, pitch_deg: float, camera_elev_m: float) -> float:
    """Elevation of the point seen at (depth, pitch) from a camera at camera_elev_m."""
    if not (math.isfinite(depth_m) and depth_m > 0.0):
        raise InvalidDepth(f"depth {depth_m!r} is not a positive finite distance")
    if not -90.0 <= pitch_deg <= 90.0:
        raise OutOfBounds(f"pitch {pitch_deg} outside [-90, 90]")
    return camera_elev_m + depth_m * math.sin(math.radians(pitch_deg))


def ray_direction(direction: SphericalDirection) -> np.ndarray:
    """Unit 3-vector (x right, y forward, z up) for a view direction."""
    az = math.radians(direction.azimuth_deg)
    pitch = math.radians(direction.pitch_deg)
    cp = math.cos(pitch)
    return np.array([math.sin(az) * cp, math.cos(az) * cp, math.sin(pitch)], dtype=float)


def great_circle_distance_m(a: GeoCoordinate, b: GeoCoordinate) -> float:
    """Haversine distance on the mean sphere, in meters."""
    lat1, lat2 = math.radians(a.lat), math.radians(b.lat)
    dlat = lat2 - lat1
    dlon = math.radians(wrap_degrees(b.lon - a.lon))
    s = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.atan2(math.sqrt(s), math.sqrt(1.0 - s))


def offset_coordinate(start: GeoCoordinate, bearing_deg: float, distance_m: float) -> GeoCoordinate:
    """Destination after travelling distance_m along an initial bearing on the sphere."""
    delta = distance_m / EARTH_RADIUS_M
    theta = math.radians(bearing_deg)
    lat1 = math.radians(start.lat)
    lat2 = math.asin(
        math.sin(lat1) * math.cos(delta) + math.cos(lat1) * math.sin(delta) * math.cos(theta)
    )
    lon2 = math.radians(start.lon) + math.atan2(
        math.sin(theta) * math.sin(delta) * math.cos(lat1),
        math.cos(delta) - math.sin(lat1) * math.sin(lat2),
    )
    return GeoCoordinate(lat=math.degrees(lat2), lon=wrap_degrees(math.degrees(lon2)))
