"""Mask exchange format: JSON manifest plus binary PGM bitmaps.

A bundle directory holds one manifest.json and one P5 bitmap per mask.
Bitmaps are strict binary (maxval 255, values only 0 or 255) so any
segmentation backend can produce them and the files stay diffable by
checksum. Masks cover a crop of the panorama and carry the crop origin,
so crop pixel (u, v) maps to panorama pixel
(wrap(crop_origin.x + u, W), crop_origin.y + v).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    IoFailure,
    MissingManifest,
    NonBinaryPixel,
    ParseError,
)
from .geometry import PanoDims, PixelCoord

MANIFEST_NAME = "manifest.json"

_MANIFEST_KEYS = (
    "property_id",
    "file",
    "crop_origin_x",
    "crop_origin_y",
    "crop_w",
    "crop_h",
    "score",
    "prompt",
    "model_id",
)


@dataclass(frozen=True)
class SegMask:
    """Binary segmentation mask over a crop region of one panorama."""

    property_id: str
    panorama_id: str
    crop_origin: PixelCoord
    crop_w: int
    crop_h: int
    bitmap: np.ndarray
    score: float
    prompt: str
    model_id: str

    def __post_init__(self):
        if self.crop_w <= 0 or self.crop_h <= 0:
            raise DimensionMismatch(f"crop {self.crop_w}x{self.crop_h} must be positive")
        bm = np.asarray(self.bitmap)
        if bm.shape != (self.crop_h, self.crop_w):
            raise DimensionMismatch(
                f"bitmap {bm.shape} does not match crop {self.crop_h}x{self.crop_w}"
            )
        bm = bm.astype(bool)
        bm.setflags(write=False)
        object.__setattr__(self, "bitmap", bm)
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ValueError(f"score {self.score!r} outside [0, 1]")
        ox, oy = self.crop_origin.x, self.crop_origin.y
        if ox != int(ox) or oy != int(oy):
            raise ValueError(f"crop origin {self.crop_origin} must be integral")

    @property
    def area_px(self) -> int:
        return int(self.bitmap.sum())

    def validate_within(self, dims: PanoDims) -> None:
        """Check the crop fits the panorama (horizontal extent wraps)."""
        if self.crop_w > dims.width_px or self.crop_h > dims.height_px:
            raise DimensionMismatch(
                f"crop {self.crop_w}x{self.crop_h} larger than panorama {dims}"
            )
        oy = int(self.crop_origin.y)
        if oy < 0 or oy + self.crop_h > dims.height_px:
            raise DimensionMismatch(f"crop rows [{oy}, {oy + self.crop_h}) outside panorama")

    def pano_pixels(self, dims: PanoDims) -> np.ndarray:
        """(n, 2) int array of panorama (x, y) for every set bitmap pixel."""
        rows, cols = np.nonzero(self.bitmap)
        x = (int(self.crop_origin.x) + cols) % dims.width_px
        y = int(self.crop_origin.y) + rows
        return np.column_stack([x, y])


def write_pgm(path: Path, bitmap: np.ndarray) -> None:
    """Write a binary mask as P5 with maxval 255 (set pixels become 255)."""
    bm = np.asarray(bitmap).astype(bool)
    h, w = bm.shape
    payload = b"P5\n%d %d\n255\n" % (w, h) + (bm.astype(np.uint8) * 255).tobytes()
    path.write_bytes(payload)


def read_pgm(path: Path) -> np.ndarray:
    """Read a strict binary P5 bitmap; values must all be 0 or 255."""
    data = path.read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError(f"{path}: truncated PGM header")
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ParseError(f"{path}: not a binary PGM (magic {fields[0]!r})")
    try:
        w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric PGM header field") from exc
    if maxval != 255:
        raise NonBinaryPixel(f"{path}: maxval {maxval}, bundle bitmaps require 255")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos : pos + w * h]
    if len(raster) != w * h or w <= 0 or h <= 0:
        raise DimensionMismatch(f"{path}: raster has {len(raster)} bytes for {w}x{h}")
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(h, w)
    bad = (arr != 0) & (arr != 255)
    if bad.any():
        value = int(arr[bad][0])
        raise NonBinaryPixel(f"{path}: pixel value {value} not in {{0, 255}}")
    return arr


def read_mask_bundle(directory: Path | str) -> list[SegMask]:
    """Load every mask in a bundle directory, validating bitmaps against the manifest."""
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.is_file():
        raise MissingManifest(f"no {MANIFEST_NAME} in {directory}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{manifest_path}: {exc}") from exc
    if not isinstance(manifest, dict) or "masks" not in manifest:
        raise ParseError(f"{manifest_path}: expected an object with a 'masks' array")
    panorama_id = str(manifest.get("panorama_id", ""))
    masks = []
    for entry in manifest["masks"]:
        missing = [k for k in _MANIFEST_KEYS if k not in entry]
        if missing:
            raise ParseError(f"{manifest_path}: mask entry missing {missing}")
        arr = read_pgm(directory / entry["file"])
        w, h = int(entry["crop_w"]), int(entry["crop_h"])
        if arr.shape != (h, w):
            raise DimensionMismatch(
                f"{entry['file']}: bitmap {arr.shape[1]}x{arr.shape[0]}, manifest says {w}x{h}"
            )
        masks.append(
            SegMask(
                property_id=str(entry["property_id"]),
                panorama_id=panorama_id,
                crop_origin=PixelCoord(
                    x=int(entry["crop_origin_x"]), y=int(entry["crop_origin_y"])
                ),
                crop_w=w,
                crop_h=h,
                bitmap=arr == 255,
                score=float(entry["score"]),
                prompt=str(entry["prompt"]),
                model_id=str(entry["model_id"]),
            )
        )
    return masks


def write_mask_bundle(
    masks: list[SegMask], directory: Path | str, panorama_id: str | None = None
) -> Path:
    """Write masks as a bundle; returns the manifest path.

    All masks must share one panorama. Bitmap files are named by position
    and property so manifest order is reproducible.
    """
    directory = Path(directory)
    if panorama_id is None:
        panorama_id = masks[0].panorama_id if masks else ""
    entries = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for i, mask in enumerate(masks):
            if mask.panorama_id != panorama_id:
                raise ValueError(
                    f"mask {mask.property_id} belongs to {mask.panorama_id}, bundle is {panorama_id}"
                )
            safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in mask.property_id)
            name = f"{i:04d}_{safe}.pgm"
            write_pgm(directory / name, mask.bitmap)
            entries.append(
                {
                    "property_id": mask.property_id,
                    "file": name,
                    "crop_origin_x": int(mask.crop_origin.x),
                    "crop_origin_y": int(mask.crop_origin.y),
                    "crop_w": mask.crop_w,
                    "crop_h": mask.crop_h,
                    "score": mask.score,
                    "prompt": mask.prompt,
                    "model_id": mask.model_id,
                }
            )
        manifest_path = directory / MANIFEST_NAME
        manifest_path.write_text(
            json.dumps({"panorama_id": panorama_id, "masks": entries}, indent=2) + "\n",
            encoding="utf-8",
        )
    except OSError as exc:
        raise IoFailure(f"writing bundle to {directory}: {exc}") from exc
    return manifest_path


def scan_mask_bundles(root: Path | str) -> list[SegMask]:
    """Read one bundle, or every bundle directly under `root`, in sorted order."""
    root = Path(root)
    if (root / MANIFEST_NAME).is_file():
        return read_mask_bundle(root)
    masks = []
    found = False
    for child in sorted(p for p in root.iterdir() if p.is_dir()):
        if (child / MANIFEST_NAME).is_file():
            found = True
            masks.extend(read_mask_bundle(child))
    if not found:
        raise MissingManifest(f"no mask bundles under {root}")
    return masks


def shift_mask(mask: SegMask, new_origin: PixelCoord) -> SegMask:
    """Copy of a mask with a different crop origin (bitmap unchanged)."""
    return replace(mask, crop_origin=new_origin)
