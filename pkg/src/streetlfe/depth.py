"""Codec for street-view depth payloads and a raw grid interchange format.

The provider payload is URL-safe base64 over a plane-based layout:
an 8-byte little-endian header (u8 header_size=8, u16 plane_count,
u16 width, u16 height, u8 offset), then width*height u8 plane indices
row-major, then plane_count records of four little-endian f32
(nx, ny, nz, d). Index 0 means "no plane"; record 0 is a placeholder
that is never dereferenced. A pixel's depth is the distance to its
plane along the pixel's view ray: d / dot(normal, ray).

Depth grids are equirectangular at lower resolution than the optical
panorama. Grid cell (i, j) covers azimuth/pitch cell [i, i+1) x [j, j+1)
in its own pixel scale and is sampled at the cell center. NaN is the one
invalid-depth sentinel; 0 is never used for missing data.
"""

from __future__ import annotations

import base64
import binascii
import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadHeader, BadMagic, MalformedBase64, SizeMismatch, TruncatedPayload
from .geometry import PanoDims, PixelCoord

RAW_GRID_MAGIC = b"LFEDEPTH"

_HEADER = struct.Struct("<BHHHB")
_PLANE = struct.Struct("<ffff")
_B64_ALPHABET = re.compile(r"[A-Za-z0-9_-]*")
_B64_TRANSLATE = str.maketrans("-_", "+/")


@dataclass(frozen=True)
class DepthGrid:
    """Per-pixel radial distances in meters on an equirectangular grid.

    Values are float32, row-major, NaN where no measurement exists.
    """

    width_px: int
    height_px: int
    values: np.ndarray

    def __post_init__(self):
        if self.width_px != 2 * self.height_px or self.height_px <= 0:
            raise ValueError(
                f"{self.width_px}x{self.height_px}: grid width must be twice the height"
            )
        vals = np.asarray(self.values, dtype=np.float32)
        if vals.shape != (self.height_px, self.width_px):
            raise ValueError(
                f"value array {vals.shape} does not match {self.height_px}x{self.width_px}"
            )
        finite = vals[np.isfinite(vals)]
        if finite.size and finite.min() <= 0.0:
            raise ValueError("finite depths must be positive; use NaN for missing data")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def dims(self) -> PanoDims:
        return PanoDims(width_px=self.width_px, height_px=self.height_px)


@dataclass(frozen=True)
class PlaneSet:
    """Plane-based intermediate form of a depth payload.

    planes is an (n, 4) float32 array of (nx, ny, nz, d); row 0 is the
    reserved no-plane placeholder. index_grid holds per-pixel row indices
    into planes, 0 where a pixel has no plane.
    """

    planes: np.ndarray
    index_grid: np.ndarray

    def __post_init__(self):
        planes = np.asarray(self.planes, dtype=np.float32)
        idx = np.asarray(self.index_grid, dtype=np.uint8)
        if planes.ndim != 2 or planes.shape[1] != 4 or planes.shape[0] < 1:
            raise ValueError("planes must be an (n>=1, 4) array")
        norms = np.linalg.norm(planes[:, :3].astype(np.float64), axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-3):
            raise ValueError("plane normals must be unit length within 1e-3")
        if idx.ndim != 2:
            raise ValueError("index_grid must be 2-D")
        if idx.max(initial=0) >= planes.shape[0]:
            raise ValueError("plane index out of range")
        planes.setflags(write=False)
        idx.setflags(write=False)
        object.__setattr__(self, "planes", planes)
        object.__setattr__(self, "index_grid", idx)

    @classmethod
    def from_planes(cls, planes, index_grid) -> "PlaneSet":
        """Build a PlaneSet from real planes only, prepending the placeholder row.

        index_grid uses 1-based references into `planes` (0 = no plane),
        matching the wire convention.
        """
        rows = [np.array([0.0, 0.0, 1.0, 0.0], dtype=np.float32)]
        for normal, d in planes:
            rows.append(np.array([*normal, d], dtype=np.float32))
        return cls(planes=np.stack(rows), index_grid=index_grid)


def _cell_center_rays(height: int, width: int) -> np.ndarray:
    """(h, w, 3) unit view rays at equirectangular cell centers."""
    az = (np.arange(width, dtype=np.float64) + 0.5) / width * 2.0 * np.pi - np.pi
    pitch = np.pi / 2.0 - (np.arange(height, dtype=np.float64) + 0.5) / height * np.pi
    cos_p = np.cos(pitch)[:, None]
    rays = np.empty((height, width, 3), dtype=np.float64)
    rays[:, :, 0] = np.sin(az)[None, :] * cos_p
    rays[:, :, 1] = np.cos(az)[None, :] * cos_p
    rays[:, :, 2] = np.sin(pitch)[:, None] * np.ones((1, width))
    return rays


def _depths_from_planes(planes: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Per-pixel plane-intersection distances, NaN where undefined or behind."""
    h, w = idx.shape
    if planes.shape[0] == 0:
        return np.full((h, w), np.nan, dtype=np.float64)
    rays = _cell_center_rays(h, w)
    p64 = planes.astype(np.float64)
    normals = p64[idx, :3]
    d = p64[idx, 3]
    denom = np.einsum("ijk,ijk->ij", normals, rays)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = d / denom
    t[idx == 0] = np.nan
    t[~np.isfinite(t)] = np.nan
    t[t <= 0.0] = np.nan
    return t


def planes_to_depths(plane_set: PlaneSet) -> np.ndarray:
    """Per-pixel plane-intersection distances for a PlaneSet, NaN where undefined."""
    return _depths_from_planes(plane_set.planes, plane_set.index_grid)


def decode_gsv_depth(payload: str) -> DepthGrid:
    """Decode a base64 depth payload into a DepthGrid.

    Accepts unpadded URL-safe base64. Raises MalformedBase64, BadHeader
    (header_size != 8), or TruncatedPayload (fewer bytes than the header
    implies).
    """
    compact = "".join(payload.split()).rstrip("=")
    if not _B64_ALPHABET.fullmatch(compact):
        raise MalformedBase64("payload contains characters outside the URL-safe alphabet")
    padded = compact + "=" * (-len(compact) % 4)
    try:
        blob = base64.b64decode(padded.translate(_B64_TRANSLATE), validate=True)
    except (binascii.Error, ValueError) as exc:
        raise MalformedBase64(f"payload is not URL-safe base64: {exc}") from exc
    return decode_depth_bytes(blob)


def decode_depth_bytes(blob: bytes) -> DepthGrid:
    """Decode the raw byte layout behind decode_gsv_depth."""
    if len(blob) < _HEADER.size:
        raise TruncatedPayload(f"{len(blob)} bytes, need at least {_HEADER.size} for the header")
    header_size, plane_count, width, height, _offset = _HEADER.unpack_from(blob, 0)
    if header_size != 8:
        raise BadHeader(f"header_size {header_size}, expected 8")
    expected = _HEADER.size + width * height + plane_count * _PLANE.size
    if len(blob) < expected:
        raise TruncatedPayload(f"{len(blob)} bytes, header implies {expected}")
    idx = (
        np.frombuffer(blob, dtype=np.uint8, count=width * height, offset=_HEADER.size)
        .reshape(height, width)
        .copy()
    )
    planes = (
        np.frombuffer(
            blob, dtype="<f4", count=plane_count * 4, offset=_HEADER.size + width * height
        )
        .reshape(plane_count, 4)
        .astype(np.float32)
    )
    # Out-of-range indices are treated as no-plane rather than aborting the batch.
    idx[idx >= max(plane_count, 1)] = 0
    depths = _depths_from_planes(planes, idx)
    try:
        return DepthGrid(width_px=width, height_px=height, values=depths)
    except ValueError as exc:
        raise BadHeader(f"decoded dimensions invalid: {exc}") from exc


def encode_plane_payload(plane_set: PlaneSet) -> str:
    """Pack a PlaneSet into the unpadded URL-safe base64 wire form."""
    idx = plane_set.index_grid
    h, w = idx.shape
    planes = np.ascontiguousarray(plane_set.planes, dtype="<f4")
    header = _HEADER.pack(8, planes.shape[0], w, h, 8)
    blob = header + idx.tobytes() + planes.tobytes()
    return base64.urlsafe_b64encode(blob).decode("ascii").rstrip("=")


def sample_depth(grid: DepthGrid, pano_pixel: PixelCoord, pano_dims: PanoDims) -> float:
    """Depth at a panorama pixel, nearest-neighbor on the lower-resolution grid.

    The panorama pixel is scaled to grid coordinates proportionally to the
    shared angular axes; the containing cell (= nearest cell center) is
    returned verbatim, so NaN propagates and values are never blended
    across depth discontinuities.
    """
    gw, gh = grid.width_px, grid.height_px
    x = pano_pixel.x % pano_dims.width_px
    col = int(x * gw / pano_dims.width_px) % gw
    row_f = pano_pixel.y * gh / pano_dims.height_px
    row = min(gh - 1, max(0, int(row_f)))
    return float(grid.values[row, col])


def write_raw_grid(grid: DepthGrid) -> bytes:
    """Serialize a grid to the bit-exact raw layout (magic, u32 w, u32 h, f32 values)."""
    header = RAW_GRID_MAGIC + struct.pack("<II", grid.width_px, grid.height_px)
    return header + np.ascontiguousarray(grid.values, dtype="<f4").tobytes()


def read_raw_grid(blob: bytes) -> DepthGrid:
    """Parse the raw grid layout; raises BadMagic or SizeMismatch."""
    if len(blob) < len(RAW_GRID_MAGIC) or blob[: len(RAW_GRID_MAGIC)] != RAW_GRID_MAGIC:
        raise BadMagic("raw grid blob lacks the LFEDEPTH magic")
    offset = len(RAW_GRID_MAGIC)
    if len(blob) < offset + 8:
        raise SizeMismatch("raw grid blob truncated before the dimension fields")
    width, height = struct.unpack_from("<II", blob, offset)
    expected = offset + 8 + width * height * 4
    if len(blob) != expected:
        raise SizeMismatch(f"{len(blob)} bytes, {width}x{height} grid needs exactly {expected}")
    values = np.frombuffer(blob, dtype="<f4", count=width * height, offset=offset + 8).reshape(
        height, width
    )
    return DepthGrid(width_px=width, height_px=height, values=values)


def save_raw_grid(path: Path | str, grid: DepthGrid) -> None:
    Path(path).write_bytes(write_raw_grid(grid))


def load_raw_grid(path: Path | str) -> DepthGrid:
    return read_raw_grid(Path(path).read_bytes())


def load_payload_file(path: Path | str) -> DepthGrid:
    """Decode a depth payload stored as base64 text (one payload per file)."""
    return decode_gsv_depth(Path(path).read_text(encoding="ascii"))
