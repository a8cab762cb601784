"""Run configuration: one JSON file, grouped keys, validated on load.

Lengths are meters, times seconds, angles degrees. Unknown keys are
rejected so a typo cannot silently fall back to a default.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .geometry import GeometricConfig, GeometryError

GEOMETRY_KEYS = {
    "f_deg": "f_deg",
    "h_vip_m": "h_vip",
    "h_max_m": "h_max",
    "walk_speed_mps": "walk_speed",
    "t_detect_s": "t_detect",
    "t_react_s": "t_react",
    "buffer_factor": "buffer_factor",
    "perception_range_m": "perception_range",
    "visible_fraction": "visible_fraction",
    "hfov_deg": "hfov_deg",
}


@dataclass(frozen=True)
class PlannerConfig:
    n_partitions: int = 3
    width_margin: float = 1.2
    danger_mult: float = 1.0
    warning_mult: float = 2.0
    edge_box_px: int = 90
    edge_threshold: float = 128.0

    def __post_init__(self):
        if self.n_partitions < 1 or self.n_partitions % 2 == 0:
            raise ConfigError(
                f"planner.n_partitions must be odd and positive, got {self.n_partitions}"
            )
        if self.width_margin <= 0:
            raise ConfigError(f"planner.width_margin {self.width_margin} not positive")
        if not 0 < self.danger_mult <= self.warning_mult:
            raise ConfigError(
                f"planner thresholds need 0 < danger_mult <= warning_mult, "
                f"got {self.danger_mult}, {self.warning_mult}"
            )
        if self.edge_box_px <= 0:
            raise ConfigError(f"planner.edge_box_px {self.edge_box_px} not positive")
        if not 0 <= self.edge_threshold < 255:
            raise ConfigError(
                f"planner.edge_threshold {self.edge_threshold} outside [0, 255)"
            )


@dataclass(frozen=True)
class PipelineTuning:
    vip_hold_frames: int = 30   # frames to coast on a lost VIP before flagging
    reroute_patience: int = 5   # consecutive exhausted frames before replanning
    live_speed: bool = False    # recompute d' from tracked VIP speed
    iou_threshold: float = 0.3
    max_misses: int = 15

    def __post_init__(self):
        if self.vip_hold_frames < 0:
            raise ConfigError(f"pipeline.vip_hold_frames {self.vip_hold_frames} < 0")
        if self.reroute_patience < 1:
            raise ConfigError(
                f"pipeline.reroute_patience {self.reroute_patience} < 1"
            )
        if not 0.0 < self.iou_threshold < 1.0:
            raise ConfigError(
                f"pipeline.iou_threshold {self.iou_threshold} outside (0,1)"
            )
        if self.max_misses < 0:
            raise ConfigError(f"pipeline.max_misses {self.max_misses} < 0")


@dataclass(frozen=True)
class Config:
    geometry: GeometricConfig = field(default_factory=GeometricConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    pipeline: PipelineTuning = field(default_factory=PipelineTuning)


def default_config() -> Config:
    return Config()


def _build(section: str, raw: dict, key_map: dict, cls):
    kwargs = {}
    for key, value in raw.items():
        if key not in key_map:
            raise ConfigError(f"unknown key '{section}.{key}'")
        kwargs[key_map[key]] = value
    try:
        return cls(**kwargs)
    except (GeometryError, TypeError) as exc:
        raise ConfigError(f"bad '{section}' section: {exc}") from exc


def config_from_dict(obj: dict) -> Config:
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    known = {"geometry", "planner", "pipeline"}
    for section in obj:
        if section not in known:
            raise ConfigError(f"unknown config section '{section}'")
    for section, raw in obj.items():
        if not isinstance(raw, dict):
            raise ConfigError(f"config section '{section}' must be an object")
    identity = lambda names: {n: n for n in names}
    geometry = _build(
        "geometry", obj.get("geometry", {}), GEOMETRY_KEYS, GeometricConfig
    )
    planner = _build(
        "planner",
        obj.get("planner", {}),
        identity(
            [
                "n_partitions",
                "width_margin",
                "danger_mult",
                "warning_mult",
                "edge_box_px",
                "edge_threshold",
            ]
        ),
        PlannerConfig,
    )
    pipeline = _build(
        "pipeline",
        obj.get("pipeline", {}),
        identity(
            [
                "vip_hold_frames",
                "reroute_patience",
                "live_speed",
                "iou_threshold",
                "max_misses",
            ]
        ),
        PipelineTuning,
    )
    return Config(geometry=geometry, planner=planner, pipeline=pipeline)


def load_config(path) -> Config:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON: {exc}") from exc
    return config_from_dict(obj)
