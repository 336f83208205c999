"""Street-view depth payloads, decoded and sampled.

Provider depth arrives as URL-safe base64 over a compact plane-based
layout. This script builds a payload for a tiny scene (a floor plane),
decodes it, and shows how panorama pixels are mapped onto the coarser
depth grid.
"""

import numpy as np

from streetlfe import PanoDims, PixelCoord, decode_gsv_depth, encode_plane_payload, sample_depth
from streetlfe.depth import PlaneSet, read_raw_grid, write_raw_grid

# A floor 2.5 m below the camera, covering the whole grid.
plane_set = PlaneSet.from_planes(
    [((0.0, 0.0, -1.0), 2.5)],
    np.ones((8, 16), dtype=np.uint8),
)
payload = encode_plane_payload(plane_set)
print(f"payload ({len(payload)} base64 chars): {payload[:60]}...")

grid = decode_gsv_depth(payload)
print(f"decoded grid: {grid.width_px}x{grid.height_px}")
print("row depths (NaN above the horizon, growing toward the horizon):")
for i in range(grid.height_px):
    row = grid.values[i]
    label = "NaN" if np.isnan(row).all() else f"{np.nanmin(row):6.2f} m"
    print(f"  row {i}: {label}")

print()
print("== sampling panorama pixels against the grid ==")
pano = PanoDims(width_px=1024, height_px=512)
for y in (300, 384, 480):
    d = sample_depth(grid, PixelCoord(x=512, y=y), pano)
    print(f"pano pixel (512, {y}) -> depth {d:6.2f} m")

print()
print("== raw grid interchange ==")
blob = write_raw_grid(grid)
back = read_raw_grid(blob)
print(f"serialized {len(blob)} bytes; round trip bit-exact:",
      bool(np.array_equal(back.values, grid.values, equal_nan=True)))
