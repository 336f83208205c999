"""End-to-end batch run through the command-line surface.

Builds a three-scene fixture in a temporary directory, runs the
`estimate` subcommand over it, and scores the predictions with `eval`.
Everything here also works from a shell; the module calls are inlined so
the demo is self-contained.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from streetlfe.cli import main
from streetlfe.geometry import PanoDims
from streetlfe.synth import DoorSpec, SceneSpec, scene_parcel_feature, write_scene_assets

rng = np.random.default_rng(11)
root = Path(tempfile.mkdtemp(prefix="streetlfe-demo-"))
print(f"fixture root: {root}")

features = []
for i in range(3):
    ground = float(rng.uniform(0.0, 10.0))
    spec = SceneSpec(
        camera_height_m=2.6,
        camera_elev_m=ground + 2.6,
        ground_elev_m=ground,
        facade_distance_m=float(rng.uniform(4.0, 12.0)),
        facade_azimuth_deg=float(rng.uniform(-180.0, 180.0)),
        door=DoorSpec(0.0, 1.2, ground + float(rng.uniform(0.2, 1.5)), 2.0),
        depth_dims=PanoDims(width_px=1024, height_px=512),
        panorama_id=f"pano-{i}",
        property_id=f"house-{i}",
    )
    write_scene_assets(spec, root / "panos", root / "masks")
    features.append(scene_parcel_feature(spec))
    print(f"scene {i}: facade {spec.facade_distance_m:.1f} m, "
          f"door bottom {spec.door.bottom_elev_m:.2f} m")

(root / "parcels.geojson").write_text(
    json.dumps({"type": "FeatureCollection", "features": features}, indent=2)
)

print("\n$ streetlfe estimate ...")
main([
    "estimate",
    "--parcels", str(root / "parcels.geojson"),
    "--panos", str(root / "panos"),
    "--masks", str(root / "masks"),
    "--out", str(root / "predictions.geojson"),
])

print("\npredictions:")
for feature in json.loads((root / "predictions.geojson").read_text())["features"]:
    props = feature["properties"]
    print(f"  {props['property_id']}: {props['status']}, lfe {props.get('lfe_m')}")

print("\n$ streetlfe eval ...")
main([
    "eval",
    "--pred", str(root / "predictions.geojson"),
    "--truth", str(root / "parcels.geojson"),
])
