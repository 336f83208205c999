"""Pipeline configuration with file + flag override support."""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class PipelineConfig:
    """Tunable knobs of the estimation pipeline.

    Defaults: 90 deg horizontal crop, half-height vertical crop, one-sided
    median + 3*MAD outlier rejection with a 0.01 m MAD floor, and at least
    5 usable door-bottom columns per estimate.
    """

    fov_deg: float = 90.0
    v_frac: float = 0.5
    outlier_k: float = 3.0
    mad_floor_m: float = 0.01
    min_points: int = 5
    viewpoint_strategy: str = "nearest"
    live_fetch: bool = False
    concurrency: int = 4

    def __post_init__(self):
        if not 0.0 < self.fov_deg <= 360.0:
            raise ValueError(f"fov_deg {self.fov_deg} outside (0, 360]")
        if not 0.0 < self.v_frac <= 1.0:
            raise ValueError(f"v_frac {self.v_frac} outside (0, 1]")
        if self.outlier_k <= 0.0:
            raise ValueError("outlier_k must be positive")
        if self.mad_floor_m < 0.0:
            raise ValueError("mad_floor_m must be non-negative")
        if self.min_points < 1:
            raise ValueError("min_points must be at least 1")
        if self.viewpoint_strategy not in ("nearest",):
            raise ValueError(f"unknown viewpoint strategy {self.viewpoint_strategy!r}")
        if self.concurrency < 1:
            raise ValueError("concurrency must be at least 1")


_FIELD_NAMES = {f.name for f in dataclasses.fields(PipelineConfig)}


def load_config(path: Path | str | None = None, overrides: Mapping[str, Any] | None = None) -> PipelineConfig:
    """Build a config with precedence: explicit overrides > config file > defaults."""
    values: dict[str, Any] = {}
    if path is not None:
        with open(path, "rb") as fh:
            parsed = tomllib.load(fh)
        unknown = set(parsed) - _FIELD_NAMES
        if unknown:
            raise ValueError(f"unknown config keys in {path}: {sorted(unknown)}")
        values.update(parsed)
    if overrides:
        unknown = set(overrides) - _FIELD_NAMES
        if unknown:
            raise ValueError(f"unknown config overrides: {sorted(unknown)}")
        values.update({k: v for k, v in overrides.items() if v is not None})
    return PipelineConfig(**values)
