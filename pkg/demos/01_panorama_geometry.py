"""Tour of the angular machinery behind building localization.

A full-sphere panorama maps azimuth linearly to columns and pitch
linearly to rows. Given the camera and property coordinates plus the
vehicle heading, we can point at the building without any detector.
"""

from streetlfe import (
    GeoCoordinate,
    PanoDims,
    azimuth_from_heading,
    azimuth_to_column,
    bearing_angle,
    column_to_azimuth,
    elevation_from_depth,
    row_to_pitch,
)

dims = PanoDims(width_px=16384, height_px=8192)
camera = GeoCoordinate(29.6800, -95.4500)
house = GeoCoordinate(29.6805, -95.4495)

print("== locating a building in the panorama ==")
bearing = bearing_angle(camera, house)
print(f"bearing camera->house:      {bearing:8.3f} deg from North")

yaw = 25.0  # vehicle heading when the panorama was captured
azimuth = azimuth_from_heading(bearing, yaw)
print(f"azimuth relative to heading {azimuth:8.3f} deg")

column = azimuth_to_column(azimuth, dims)
print(f"panorama column:            {column:8.1f}  (width {dims.width_px})")
print(f"inverse check:              {column_to_azimuth(column, dims):8.3f} deg")

print()
print("== rows encode pitch ==")
for y in (0, dims.height_px // 4, dims.height_px // 2, 3 * dims.height_px // 4):
    print(f"row {y:5d} -> pitch {row_to_pitch(y, dims):6.1f} deg")

print()
print("== depth + pitch -> elevation ==")
camera_elev = 14.2
for depth, pitch in ((7.3, -12.4), (10.0, 30.0), (5.0, 0.0)):
    elev = elevation_from_depth(depth, pitch, camera_elev)
    print(f"depth {depth:5.1f} m at pitch {pitch:6.1f} deg -> elevation {elev:7.3f} m")
