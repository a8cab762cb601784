"""Frame record serialization: JSONL metadata plus binary PGM depth sidecars.

One dataset = a ``frames.jsonl`` stream (one JSON object per line, compact
separators so output is byte-stable) plus one 16-bit PGM per frame named
``<frame_id>.pgm``. Masks travel inside the JSON as run-length arrays;
depth is kept out of the JSON because a 640x480 uint16 grid is ~600 KB.
"""
from __future__ import annotations

import json
import os
from typing import Iterable, Iterator

import numpy as np

from .errors import ConsistencyError, FrameDecodeError
from .perception import (
    BitMask,
    BoundingBox,
    DepthMap,
    Detection,
    PerceptionFrame,
)

# -- PGM (portable graymap, binary P5, maxval 65535, big-endian samples) -----


def write_pgm(path, depth: DepthMap) -> None:
    """Write a depth map as a binary 16-bit PGM."""
    header = f"P5\n{depth.width} {depth.height}\n65535\n".encode("ascii")
    payload = depth.values.astype(">u2").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_pgm(path) -> DepthMap:
    """Read a binary 16-bit PGM written by :func:`write_pgm`.

    Accepts whitespace/comment variation in the header (the format allows
    it) but requires magic P5 and maxval 65535.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            if data[pos : pos + 1].isspace():
                pos += 1
            elif data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FrameDecodeError(f"{path}: truncated PGM header")
        return data[start:pos]

    magic = next_token()
    if magic != b"P5":
        raise FrameDecodeError(f"{path}: bad magic {magic!r}, expected P5")
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError as exc:
        raise FrameDecodeError(f"{path}: non-numeric PGM header field") from exc
    if maxval != 65535:
        raise FrameDecodeError(f"{path}: maxval {maxval}, expected 65535")
    if width <= 0 or height <= 0:
        raise FrameDecodeError(f"{path}: bad dimensions {width}x{height}")
    pos += 1  # single whitespace byte after maxval
    expected = width * height * 2
    raster = data[pos : pos + expected]
    if len(raster) != expected:
        raise FrameDecodeError(
            f"{path}: raster has {len(raster)} bytes, expected {expected}"
        )
    values = np.frombuffer(raster, dtype=">u2").astype(np.uint16)
    return DepthMap(width=width, height=height, values=values.reshape(height, width))


# -- JSON record codec --------------------------------------------------------


def _mask_to_json(mask: BitMask) -> dict:
    return {"runs": list(mask.runs)}


def _mask_from_json(obj, width: int, height: int, field: str) -> BitMask:
    if not isinstance(obj, dict) or "runs" not in obj:
        raise FrameDecodeError(f"field '{field}': expected an object with 'runs'")
    runs = obj["runs"]
    if not isinstance(runs, list) or not all(
        isinstance(r, int) and not isinstance(r, bool) for r in runs
    ):
        raise FrameDecodeError(f"field '{field}.runs': expected a list of ints")
    try:
        return BitMask(width=width, height=height, runs=tuple(runs))
    except ConsistencyError as exc:
        raise FrameDecodeError(f"field '{field}': {exc}") from exc


def encode_record(frame: PerceptionFrame) -> dict:
    """Frame → JSON-ready dict (depth referenced by sidecar file name)."""
    record = {
        "frame_id": frame.frame_id,
        "timestamp": frame.timestamp,
        "width": frame.width,
        "height": frame.height,
        "detections": [
            {
                "class": det.class_label,
                "bbox": det.bbox.as_list(),
                "confidence": det.confidence,
                "track_id": det.track_id,
            }
            for det in frame.detections
        ],
        "vip_mask": _mask_to_json(frame.vip_mask) if frame.vip_mask else None,
        "road_mask": _mask_to_json(frame.road_mask) if frame.road_mask else None,
        "depth_file": f"{frame.frame_id}.pgm",
    }
    if frame.instance_masks:
        record["instance_masks"] = {
            str(tid): _mask_to_json(frame.instance_masks[tid])
            for tid in sorted(frame.instance_masks)
        }
    return record


def record_to_line(record: dict) -> str:
    """Canonical one-line JSON encoding (compact separators, no key sort)."""
    return json.dumps(record, separators=(",", ":"))


def _require(record: dict, field: str, kinds, kind_name: str):
    if field not in record:
        raise FrameDecodeError(f"field '{field}': missing")
    value = record[field]
    if isinstance(value, bool) or not isinstance(value, kinds):
        raise FrameDecodeError(f"field '{field}': expected {kind_name}")
    return value


def decode_record(record: dict, depth: DepthMap) -> PerceptionFrame:
    """JSON dict + decoded sidecar depth → PerceptionFrame.

    Raises FrameDecodeError naming the offending field on malformed input
    and ConsistencyError on dimension mismatches.
    """
    frame_id = _require(record, "frame_id", int, "int")
    timestamp = _require(record, "timestamp", (int, float), "number")
    width = _require(record, "width", int, "int")
    height = _require(record, "height", int, "int")
    raw_dets = _require(record, "detections", list, "list")

    detections = []
    for i, obj in enumerate(raw_dets):
        if not isinstance(obj, dict):
            raise FrameDecodeError(f"field 'detections[{i}]': expected an object")
        try:
            label = obj["class"]
            bbox = obj["bbox"]
            confidence = obj["confidence"]
        except KeyError as exc:
            raise FrameDecodeError(
                f"field 'detections[{i}].{exc.args[0]}': missing"
            ) from exc
        if not isinstance(label, str):
            raise FrameDecodeError(f"field 'detections[{i}].class': expected str")
        if (
            not isinstance(bbox, list)
            or len(bbox) != 4
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in bbox)
        ):
            raise FrameDecodeError(
                f"field 'detections[{i}].bbox': expected [x1,y1,x2,y2] ints"
            )
        if isinstance(confidence, bool) or not isinstance(confidence, (int, float)):
            raise FrameDecodeError(
                f"field 'detections[{i}].confidence': expected number"
            )
        track_id = obj.get("track_id")
        if track_id is not None and (
            isinstance(track_id, bool) or not isinstance(track_id, int)
        ):
            raise FrameDecodeError(
                f"field 'detections[{i}].track_id': expected int or null"
            )
        try:
            detections.append(
                Detection(
                    class_label=label,
                    bbox=BoundingBox(*bbox),
                    confidence=float(confidence),
                    track_id=track_id,
                )
            )
        except ConsistencyError as exc:
            raise FrameDecodeError(f"field 'detections[{i}]': {exc}") from exc

    vip_mask = road_mask = None
    if record.get("vip_mask") is not None:
        vip_mask = _mask_from_json(record["vip_mask"], width, height, "vip_mask")
    if record.get("road_mask") is not None:
        road_mask = _mask_from_json(record["road_mask"], width, height, "road_mask")

    instance_masks: dict[int, BitMask] = {}
    raw_instances = record.get("instance_masks")
    if raw_instances is not None:
        if not isinstance(raw_instances, dict):
            raise FrameDecodeError("field 'instance_masks': expected an object")
        for key, obj in raw_instances.items():
            try:
                tid = int(key)
            except ValueError as exc:
                raise FrameDecodeError(
                    f"field 'instance_masks.{key}': key is not an int"
                ) from exc
            instance_masks[tid] = _mask_from_json(
                obj, width, height, f"instance_masks.{key}"
            )

    return PerceptionFrame(
        frame_id=frame_id,
        timestamp=float(timestamp),
        width=width,
        height=height,
        depth=depth,
        detections=tuple(detections),
        vip_mask=vip_mask,
        road_mask=road_mask,
        instance_masks=instance_masks,
    )


# -- dataset directory layout --------------------------------------------------

FRAMES_FILE = "frames.jsonl"


def write_dataset(directory, frames: Iterable[PerceptionFrame]) -> int:
    """Write frames.jsonl + per-frame PGM sidecars into a directory.

    Returns the number of frames written. Frame ids must strictly increase.
    """
    os.makedirs(directory, exist_ok=True)
    count = 0
    last_id = None
    with open(os.path.join(directory, FRAMES_FILE), "w", encoding="ascii") as fh:
        for frame in frames:
            if last_id is not None and frame.frame_id <= last_id:
                raise ConsistencyError(
                    f"frame_id {frame.frame_id} not greater than {last_id}"
                )
            last_id = frame.frame_id
            fh.write(record_to_line(encode_record(frame)))
            fh.write("\n")
            write_pgm(os.path.join(directory, f"{frame.frame_id}.pgm"), frame.depth)
            count += 1
    return count


def read_dataset(directory) -> Iterator[PerceptionFrame]:
    """Yield frames from a dataset directory in file order."""
    frames_path = os.path.join(directory, FRAMES_FILE)
    last_id = None
    with open(frames_path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FrameDecodeError(
                    f"{frames_path}:{lineno}: malformed JSON: {exc}"
                ) from exc
            if not isinstance(record, dict):
                raise FrameDecodeError(
                    f"{frames_path}:{lineno}: expected a JSON object"
                )
            depth_file = record.get("depth_file")
            if not isinstance(depth_file, str):
                raise FrameDecodeError(f"field 'depth_file': expected str")
            depth = read_pgm(os.path.join(directory, depth_file))
            frame = decode_record(record, depth)
            if last_id is not None and frame.frame_id <= last_id:
                raise ConsistencyError(
                    f"frame_id {frame.frame_id} not greater than {last_id}"
                )
            last_id = frame.frame_id
            yield frame
