"""Drone pose geometry relative to the escorted pedestrian.

The drone flies ahead of and above the VIP. Two constraints shape where it
may hover: the camera's vertical field of view must keep (a fraction of)
the VIP in frame, and the forward distance must leave enough sensing range
to react to obstacles at walking speed. The admissible poses form a
segment between a near/high endpoint and a far/low endpoint.

All angles are degrees at the API surface, lengths meters, times seconds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import GeometryError, InfeasibleConfigError

D_MIN_FLOOR = 1.0
D_MAX_CEILING = 10.0


@dataclass(frozen=True)
class GeometricConfig:
    """Camera, VIP and timing parameters that fix the pose envelope."""

    f_deg: float = 90.0          # vertical field of view
    h_vip: float = 1.7           # VIP height, meters
    h_max: float = 3.0           # highest allowed height offset above the VIP's head
    walk_speed: float = 1.2      # m/s
    t_detect: float = 0.161      # perception latency, seconds
    t_react: float = 1.0         # human reaction allowance, seconds
    buffer_factor: float = 0.05
    perception_range: float = 15.0
    visible_fraction: float = 2.0 / 3.0
    hfov_deg: float = 90.0

    def __post_init__(self):
        if not 0.0 < self.f_deg < 180.0:
            raise GeometryError(f"vertical fov {self.f_deg} outside (0, 180)")
        if not 0.0 < self.hfov_deg < 180.0:
            raise GeometryError(f"horizontal fov {self.hfov_deg} outside (0, 180)")
        if self.h_vip <= 0:
            raise GeometryError(f"vip height {self.h_vip} not positive")
        if self.h_max < self.h_vip:
            raise GeometryError(f"h_max {self.h_max} below vip height {self.h_vip}")
        if self.walk_speed < 0:
            raise GeometryError(f"negative walk speed {self.walk_speed}")
        if self.t_detect < 0 or self.t_react < 0:
            raise GeometryError("negative latency")
        if not 0.0 < self.visible_fraction <= 1.0:
            raise GeometryError(
                f"visible fraction {self.visible_fraction} outside (0, 1]"
            )
        if self.buffer_factor < 0:
            raise GeometryError(f"negative buffer factor {self.buffer_factor}")
        if self.perception_range <= 0:
            raise GeometryError(
                f"perception range {self.perception_range} not positive"
            )


@dataclass(frozen=True)
class PoseEnvelope:
    """Admissible (height offset, forward distance) segment.

    near endpoint: (h_max, d_min) — high and close;
    far endpoint: (h_vip, d_max) — level with the VIP's head and far out.
    """

    h_near: float
    d_min: float
    h_far: float
    d_max: float

    def interpolate(self, t: float) -> tuple[float, float]:
        """Pose at parameter t in [0,1]; t=0 near endpoint, t=1 far."""
        h = self.h_near + t * (self.h_far - self.h_near)
        d = self.d_min + t * (self.d_max - self.d_min)
        return h, d


def visibility_offset(f_deg: float, d: float) -> float:
    """Height offset at which the head-top ray grazes the upper FoV edge.

    h' = d * tan(f/2)
    """
    if not 0.0 < f_deg < 180.0:
        raise GeometryError(f"fov {f_deg} outside (0, 180)")
    if d <= 0:
        raise GeometryError(f"distance {d} not positive")
    return d * math.tan(math.radians(f_deg) / 2.0)


def safety_distance(walk_speed: float, t_detect: float, t_react: float) -> float:
    """Stopping margin: d' = x * (t_detect + t_react)."""
    if walk_speed < 0 or t_detect < 0 or t_react < 0:
        raise GeometryError("safety distance inputs must be nonnegative")
    return walk_speed * (t_detect + t_react)


def lookahead(d: float, d_prime: float, buffer_factor: float = 0.05) -> float:
    """Forward range the camera must cover: d + d' plus a buffer fraction of d'."""
    return d + d_prime + buffer_factor * d_prime


def min_distance_for_visibility(h_prime: float, cfg: GeometricConfig) -> float:
    """Smallest distance keeping the top visible_fraction of the VIP in frame.

    At height offset h' the camera must fit h' + phi*h_vip of vertical extent
    below its axis within half the FoV, so d >= (h' + phi*h_vip)/tan(f/2).
    Clamped to the 1 m proximity floor.
    """
    if h_prime < 0:
        raise GeometryError(f"negative height offset {h_prime}")
    tan_half = math.tan(math.radians(cfg.f_deg) / 2.0)
    need = (h_prime + cfg.visible_fraction * cfg.h_vip) / tan_half
    return max(D_MIN_FLOOR, need)


def pose_envelope(cfg: GeometricConfig) -> PoseEnvelope:
    """Compute the admissible pose segment for a configuration.

    The near endpoint sits at the maximum height offset and the closest
    distance that still shows enough of the VIP; the far endpoint sits
    level with the VIP's head at the largest distance whose lookahead the
    sensor can still cover (capped at 10 m).
    """
    d_min = min_distance_for_visibility(cfg.h_max, cfg)
    d_prime = safety_distance(cfg.walk_speed, cfg.t_detect, cfg.t_react)
    # lookahead(d_max, d') must not exceed perception_range
    d_max = cfg.perception_range - d_prime - cfg.buffer_factor * d_prime
    d_max = min(D_MAX_CEILING, d_max)
    if d_min > d_max:
        raise InfeasibleConfigError(
            f"pose envelope empty: d_min {d_min:.3f} m > d_max {d_max:.3f} m"
        )
    return PoseEnvelope(h_near=cfg.h_max, d_min=d_min, h_far=cfg.h_vip, d_max=d_max)


def validate_pose(h_prime: float, d: float, cfg: GeometricConfig) -> list[str]:
    """List every constraint the pose violates; empty list = admissible.

    Violations are data, not errors: this stays total even for configs
    whose envelope is empty (every pose then violates a distance bound).
    """
    violations = []
    d_min = min_distance_for_visibility(cfg.h_max, cfg)
    d_prime = safety_distance(cfg.walk_speed, cfg.t_detect, cfg.t_react)
    d_max = min(
        D_MAX_CEILING,
        cfg.perception_range - d_prime - cfg.buffer_factor * d_prime,
    )
    tan_half = math.tan(math.radians(cfg.f_deg) / 2.0)
    eps = 1e-9
    if h_prime > d * tan_half + eps:
        violations.append(
            f"head not visible: h'={h_prime:.3f} > d*tan(f/2)={d * tan_half:.3f}"
        )
    if d < d_min - eps:
        violations.append(f"d={d:.3f} below minimum distance {d_min:.3f}")
    if d > d_max + eps:
        violations.append(f"d={d:.3f} beyond maximum distance {d_max:.3f}")
    if h_prime < cfg.h_vip - eps:
        violations.append(f"h'={h_prime:.3f} below VIP head height {cfg.h_vip:.3f}")
    if h_prime > cfg.h_max + eps:
        violations.append(f"h'={h_prime:.3f} above height ceiling {cfg.h_max:.3f}")
    return violations
