"""Greedy IoU tracking with constant-position hold.

Gives detections stable ids across frames and, once per-track distances
are attached, estimates how fast the VIP closes on each obstacle. A full
motion-model tracker can be swapped in behind the same interface; id
stability and approach rate are all the planner needs.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import InsufficientHistoryError
from .perception import BoundingBox, Detection

IOU_THRESHOLD = 0.3
MAX_MISSES = 15  # ~0.5 s at 30 fps


@dataclass(frozen=True)
class TrackPoint:
    timestamp: float
    bbox: BoundingBox
    distance_m: float | None = None


@dataclass(frozen=True)
class Track:
    track_id: int
    class_label: str
    history: tuple[TrackPoint, ...]
    misses: int = 0

    def __post_init__(self):
        if self.misses < 0:
            raise ValueError(f"negative misses {self.misses}")
        times = [p.timestamp for p in self.history]
        if any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
            raise ValueError("history timestamps not strictly increasing")

    @property
    def last_bbox(self) -> BoundingBox:
        return self.history[-1].bbox

    @property
    def last_distance(self) -> float | None:
        return self.history[-1].distance_m


def iou(b1: BoundingBox, b2: BoundingBox) -> float:
    """Intersection-over-union of two boxes."""
    ix = min(b1.x2, b2.x2) - max(b1.x1, b2.x1)
    iy = min(b1.y2, b2.y2) - max(b1.y1, b2.y1)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = b1.width * b1.height + b2.width * b2.height - inter
    return inter / union


class Tracker:
    """Owns track state and the never-reused id counter for one stream."""

    def __init__(self, iou_threshold: float = IOU_THRESHOLD, max_misses: int = MAX_MISSES):
        if not 0.0 < iou_threshold < 1.0:
            raise ValueError(f"iou_threshold {iou_threshold} outside (0,1)")
        self.iou_threshold = iou_threshold
        self.max_misses = max_misses
        self.tracks: list[Track] = []
        self._next_id = 0

    def step(
        self,
        timestamp: float,
        detections: list[Detection],
        distances: list[float | None] | None = None,
    ) -> list[Detection]:
        """Associate one frame's detections; returns them with track_ids set.

        Matching is greedy over same-class (track, detection) pairs in
        descending IoU at or above the threshold; ties broken toward the
        lower detection index, then the older track. Unmatched detections
        open new tracks. Unmatched tracks accrue a miss, hold their last
        bbox, and retire once misses exceed max_misses.
        """
        if distances is None:
            distances = [None] * len(detections)

        candidates = []
        for t_pos, track in enumerate(self.tracks):
            for d_idx, det in enumerate(detections):
                if det.class_label != track.class_label:
                    continue
                overlap = iou(track.last_bbox, det.bbox)
                if overlap >= self.iou_threshold:
                    candidates.append((-overlap, d_idx, t_pos))
        candidates.sort()

        det_match: dict[int, int] = {}  # det idx -> track position
        used_tracks: set[int] = set()
        for neg_overlap, d_idx, t_pos in candidates:
            if d_idx in det_match or t_pos in used_tracks:
                continue
            det_match[d_idx] = t_pos
            used_tracks.add(t_pos)

        new_tracks: list[Track] = []
        matched_by_pos = {t_pos: d_idx for d_idx, t_pos in det_match.items()}
        for t_pos, track in enumerate(self.tracks):
            if t_pos in matched_by_pos:
                d_idx = matched_by_pos[t_pos]
                point = TrackPoint(
                    timestamp=timestamp,
                    bbox=detections[d_idx].bbox,
                    distance_m=distances[d_idx],
                )
                new_tracks.append(
                    replace(track, history=track.history + (point,), misses=0)
                )
            else:
                if track.misses + 1 > self.max_misses:
                    continue  # retired
                new_tracks.append(replace(track, misses=track.misses + 1))

        labeled: list[Detection] = []
        for d_idx, det in enumerate(detections):
            if d_idx in det_match:
                tid = self.tracks[det_match[d_idx]].track_id
            else:
                tid = self._next_id
                self._next_id += 1
                new_tracks.append(
                    Track(
                        track_id=tid,
                        class_label=det.class_label,
                        history=(
                            TrackPoint(
                                timestamp=timestamp,
                                bbox=det.bbox,
                                distance_m=distances[d_idx],
                            ),
                        ),
                    )
                )
            labeled.append(replace(det, track_id=tid))

        self.tracks = new_tracks
        return labeled

    def get(self, track_id: int) -> Track | None:
        for track in self.tracks:
            if track.track_id == track_id:
                return track
        return None


def approach_rate(track: Track, window: float) -> float:
    """Closing speed (m/s, positive = approaching) from recent distances.

    Least-squares slope of distance vs time over the trailing window,
    negated so shrinking distance reads as a positive rate.
    """
    if not track.history:
        raise InsufficientHistoryError(f"track {track.track_id} has no history")
    t_end = track.history[-1].timestamp
    points = [
        (p.timestamp, p.distance_m)
        for p in track.history
        if p.distance_m is not None and p.timestamp >= t_end - window
    ]
    if len(points) < 2:
        raise InsufficientHistoryError(
            f"track {track.track_id}: {len(points)} usable points in window"
        )
    n = len(points)
    mean_t = sum(t for t, _ in points) / n
    mean_d = sum(d for _, d in points) / n
    num = sum((t - mean_t) * (d - mean_d) for t, d in points)
    den = sum((t - mean_t) ** 2 for t, _ in points)
    return -num / den
