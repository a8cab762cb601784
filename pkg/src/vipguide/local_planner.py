"""Per-frame heading selection: partition scoring, free space, road edges.

The frame is split into n (odd) vertical partitions. Each partition gets a
depth score H(i) — the mean REV over its columns with the VIP's own pixels
excluded — so a partition hiding a close obstacle scores high even when the
obstacle was never detected as a box. Detected obstacles near the VIP mark
columns as occupied; the gaps are free space. The heading goes to the
lowest-scoring partition that still has a wide-enough gap; if none does,
the frame escalates to a global reroute.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PlannerError
from .perception import BitMask, BoundingBox, DepthMap, Detection

N_PARTITIONS = 3
WIDTH_MARGIN = 1.2      # clearance factor on the VIP's apparent width
DANGER_MULT = 1.0       # danger when distance <= 1.0 * d'
WARNING_MULT = 2.0      # warning when distance <= 2.0 * d'
EDGE_BOX_PX = 90        # road-edge probe side, ~0.5 m at typical range
EDGE_THRESHOLD = 128.0  # probe mean (road=255) must exceed this

Severity = str  # "danger" | "warning" | "clear"
EdgeStatus = str  # "safe" | "warn_left" | "warn_right" | "warn_both" | "unknown"


@dataclass(frozen=True)
class Partition:
    index: int
    x_start: int
    x_end: int

    @property
    def width(self) -> int:
        return self.x_end - self.x_start

    @property
    def center_column(self) -> float:
        return (self.x_start + self.x_end) / 2.0


@dataclass(frozen=True)
class PartitionProfile:
    partition: Partition
    h_score: float
    empty: bool  # every pixel excluded -> score forced to 0
    free_segments: tuple[tuple[int, int], ...]
    max_free_width: int


@dataclass(frozen=True)
class ObstacleAssessment:
    track_id: int | None
    class_label: str
    distance_m: float
    severity: Severity


@dataclass(frozen=True)
class Heading:
    partition: int
    angle_deg: float


@dataclass(frozen=True)
class RerouteNeeded:
    pass


@dataclass(frozen=True)
class GuidanceDecision:
    frame_id: int
    outcome: Heading | RerouteNeeded | None  # None = vip lost
    assessments: tuple[ObstacleAssessment, ...]
    edge_status: EdgeStatus


def partition_bounds(width: int, n: int = N_PARTITIONS) -> list[Partition]:
    """Tile [0, width) into n near-equal strips, remainder going leftmost."""
    if n < 1 or n % 2 == 0:
        raise PlannerError(f"partition count must be odd and positive, got {n}")
    if width < n:
        raise PlannerError(f"width {width} cannot hold {n} partitions")
    base, extra = divmod(width, n)
    bounds = []
    x = 0
    for i in range(n):
        w = base + (1 if i < extra else 0)
        bounds.append(Partition(index=i, x_start=x, x_end=x + w))
        x += w
    return bounds


def mean_partition_depth(
    depth: DepthMap, p: Partition, exclude: BitMask | None = None
) -> tuple[float, bool]:
    """H(i): mean REV over the partition's columns, minus excluded pixels.

    Integer REVs summed in int64 then divided once, so the result is
    bit-identical to a naive wide-integer loop. Returns (0.0, True) when
    exclusion leaves nothing.
    """
    patch = depth.values[:, p.x_start : p.x_end]
    if exclude is not None:
        keep = ~exclude.decode()[:, p.x_start : p.x_end]
        count = int(np.count_nonzero(keep))
        if count == 0:
            return 0.0, True
        total = int(patch.sum(dtype=np.int64, where=keep))
    else:
        count = patch.size
        if count == 0:
            return 0.0, True
        total = int(patch.sum(dtype=np.int64))
    return total / count, False


def free_segments(
    detections: list[Detection],
    distances: list[float],
    d_filter: float,
    width: int,
) -> list[tuple[int, int]]:
    """Frame-level maximal free column runs.

    A column is occupied when any detection within d_filter covers it;
    occupied intervals are merged and the gaps returned as half-open
    (start, end) pairs.
    """
    if d_filter <= 0:
        raise PlannerError(f"d_filter {d_filter} not positive")
    intervals = []
    for det, dist in zip(detections, distances):
        if dist > d_filter:
            continue
        x1 = max(0, det.bbox.x1)
        x2 = min(width, det.bbox.x2)
        if x1 < x2:
            intervals.append((x1, x2))
    intervals.sort()
    merged: list[list[int]] = []
    for x1, x2 in intervals:
        if merged and x1 <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], x2)
        else:
            merged.append([x1, x2])
    segments = []
    cursor = 0
    for x1, x2 in merged:
        if cursor < x1:
            segments.append((cursor, x1))
        cursor = x2
    if cursor < width:
        segments.append((cursor, width))
    return segments


def free_space(
    detections: list[Detection],
    distances: list[float],
    d_filter: float,
    width: int,
    partitions: list[Partition],
) -> list[tuple[tuple[tuple[int, int], ...], int]]:
    """Per-partition (free segments, max free width), clipped from frame runs."""
    frame_segments = free_segments(detections, distances, d_filter, width)
    out = []
    for p in partitions:
        clipped = []
        for s, e in frame_segments:
            cs, ce = max(s, p.x_start), min(e, p.x_end)
            if cs < ce:
                clipped.append((cs, ce))
        max_width = max((e - s for s, e in clipped), default=0)
        out.append((tuple(clipped), max_width))
    return out


def partition_profiles(
    depth: DepthMap,
    partitions: list[Partition],
    detections: list[Detection],
    distances: list[float],
    d_filter: float,
    exclude: BitMask | None = None,
) -> list[PartitionProfile]:
    """Bundle H(i) scores and free space into one profile per partition."""
    spaces = free_space(detections, distances, d_filter, depth.width, partitions)
    profiles = []
    for p, (segments, max_width) in zip(partitions, spaces):
        score, empty = mean_partition_depth(depth, p, exclude)
        profiles.append(
            PartitionProfile(
                partition=p,
                h_score=score,
                empty=empty,
                free_segments=segments,
                max_free_width=max_width,
            )
        )
    return profiles


def classify_obstacle(
    distance_m: float,
    d_prime: float,
    danger_mult: float = DANGER_MULT,
    warning_mult: float = WARNING_MULT,
) -> Severity:
    """Severity by distance thresholds: danger <= d', warning <= 2d'."""
    if distance_m < 0:
        raise PlannerError(f"negative distance {distance_m}")
    if d_prime <= 0:
        raise PlannerError(f"d' {d_prime} not positive")
    if distance_m <= danger_mult * d_prime:
        return "danger"
    if distance_m <= warning_mult * d_prime:
        return "warning"
    return "clear"


def _probe_mean(road: np.ndarray, x1: int, x2: int, y1: int, y2: int) -> float | None:
    """Mean of road?255:0 over a clamped probe; None when fully off-frame."""
    h, w = road.shape
    cx1, cx2 = max(0, x1), min(w, x2)
    cy1, cy2 = max(0, y1), min(h, y2)
    if cx1 >= cx2 or cy1 >= cy2:
        return None
    patch = road[cy1:cy2, cx1:cx2]
    return 255.0 * float(np.count_nonzero(patch)) / patch.size


def road_edge_check(
    vip_bbox: BoundingBox,
    road_mask: BitMask | None,
    box_px: int = EDGE_BOX_PX,
    threshold: float = EDGE_THRESHOLD,
) -> EdgeStatus:
    """Probe road coverage on both sides of the VIP, at their feet.

    Each probe is a box_px square hugging the VIP bbox, bottom-aligned to
    its lower edge. A side is safe when the probe's mean (road pixels as
    255, rest 0) exceeds the threshold; a probe pushed fully off-frame
    counts as a warning, since the margin is unobserved.
    """
    if road_mask is None:
        return "unknown"
    road = road_mask.decode()
    y1, y2 = vip_bbox.y2 - box_px, vip_bbox.y2
    left = _probe_mean(road, vip_bbox.x1 - box_px, vip_bbox.x1, y1, y2)
    right = _probe_mean(road, vip_bbox.x2, vip_bbox.x2 + box_px, y1, y2)
    left_safe = left is not None and left > threshold
    right_safe = right is not None and right > threshold
    if left_safe and right_safe:
        return "safe"
    if left_safe:
        return "warn_right"
    if right_safe:
        return "warn_left"
    return "warn_both"


def decide(
    profiles: list[PartitionProfile],
    vip_partition: int | None,
    width_threshold: int,
    hfov_deg: float,
    frame_width: int,
) -> Heading | RerouteNeeded:
    """Pick the heading partition, or escalate when nothing is wide enough.

    Candidates are taken in ascending H(i) (farther obstacles first) and
    rejected while max_free_width < width_threshold. Score ties prefer the
    VIP's own partition, then the more central one, then the lower index.
    """
    center = (len(profiles) - 1) / 2.0

    def rank(profile: PartitionProfile):
        idx = profile.partition.index
        return (
            profile.h_score,
            0 if idx == vip_partition else 1,
            abs(idx - center),
            idx,
        )

    for profile in sorted(profiles, key=rank):
        if profile.max_free_width >= width_threshold:
            return Heading(
                partition=profile.partition.index,
                angle_deg=heading_angle(profile.partition, frame_width, hfov_deg),
            )
    return RerouteNeeded()


def heading_angle(partition: Partition, width: int, hfov_deg: float) -> float:
    """Signed cue angle toward the partition center; positive = right."""
    if not (0 <= partition.x_start < partition.x_end <= width):
        raise PlannerError(
            f"partition [{partition.x_start},{partition.x_end}) outside width {width}"
        )
    return (partition.center_column - width / 2.0) / width * hfov_deg


def width_threshold_px(vip_bbox_width: int, margin: float = WIDTH_MARGIN) -> int:
    """Minimum free-gap width: the VIP's apparent width plus clearance."""
    return math.ceil(margin * vip_bbox_width)
