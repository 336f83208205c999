"""Lowest floor elevation estimation from panoramic street-view assets.

The pipeline locates buildings in equirectangular panoramas, reads
door-bottom pixels from segmentation masks, converts depth + pitch to
elevations, and reports the median as the property's lowest floor
elevation. A synthetic-scene renderer provides exact ground truth so the
whole chain is testable offline.
"""

from .config import PipelineConfig, load_config
from .depth import (
    DepthGrid,
    PlaneSet,
    decode_gsv_depth,
    encode_plane_payload,
    read_raw_grid,
    sample_depth,
    write_raw_grid,
)
from .extraction import (
    DoorBottomProfile,
    LfeRecord,
    UnavailableReason,
    estimate_lfe,
    extract_door_bottom,
    filter_outliers,
)
from .geometry import (
    GeoCoordinate,
    PanoDims,
    PixelCoord,
    SphericalDirection,
    azimuth_from_heading,
    azimuth_to_column,
    bearing_angle,
    column_to_azimuth,
    elevation_from_depth,
    pitch_to_row,
    ray_direction,
    row_to_pitch,
)
from .ingest import (
    CropRegion,
    PanoAsset,
    Parcel,
    crop_building,
    load_parcels,
    select_viewpoint,
    stitch_tiles,
)
from .masks import SegMask, read_mask_bundle, write_mask_bundle
from .metrics import Detection, EvalReport, ap50, availability, iou, mae
from .synth import (
    DoorSpec,
    SceneSpec,
    analytic_door_bottom_depth,
    render_scene,
    write_scene_fixture,
)

__version__ = "0.1.0"

__all__ = [
    "PipelineConfig",
    "load_config",
    "DepthGrid",
    "PlaneSet",
    "decode_gsv_depth",
    "encode_plane_payload",
    "read_raw_grid",
    "sample_depth",
    "write_raw_grid",
    "DoorBottomProfile",
    "LfeRecord",
    "UnavailableReason",
    "estimate_lfe",
    "extract_door_bottom",
    "filter_outliers",
    "GeoCoordinate",
    "PanoDims",
    "PixelCoord",
    "SphericalDirection",
    "azimuth_from_heading",
    "azimuth_to_column",
    "bearing_angle",
    "column_to_azimuth",
    "elevation_from_depth",
    "pitch_to_row",
    "ray_direction",
    "row_to_pitch",
    "CropRegion",
    "PanoAsset",
    "Parcel",
    "crop_building",
    "load_parcels",
    "select_viewpoint",
    "stitch_tiles",
    "SegMask",
    "read_mask_bundle",
    "write_mask_bundle",
    "Detection",
    "EvalReport",
    "ap50",
    "availability",
    "iou",
    "mae",
    "DoorSpec",
    "SceneSpec",
    "analytic_door_bottom_depth",
    "render_scene",
    "write_scene_fixture",
]
