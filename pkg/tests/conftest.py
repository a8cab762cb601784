import os

import numpy as np
import pytest

from vipguide.calibration import CalibrationModel
from vipguide.perception import BoundingBox, DepthMap, Detection, PerceptionFrame

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture
def campus_graph_path():
    return os.path.join(DATA_DIR, "campus_graph.json")


@pytest.fixture
def identity_model():
    """distance = rev, for tests that want REV/65535 passed straight through."""
    return CalibrationModel(a=0.0, b=1.0, c=0.0, rmse=0.0, n_samples=3)


def make_frame(
    depth_values,
    detections=(),
    frame_id=0,
    timestamp=0.0,
    vip_mask=None,
    road_mask=None,
    instance_masks=None,
):
    """Frame from a raw 2D array plus optional parts; dims inferred."""
    arr = np.asarray(depth_values, dtype=np.uint16)
    h, w = arr.shape
    return PerceptionFrame(
        frame_id=frame_id,
        timestamp=timestamp,
        width=w,
        height=h,
        depth=DepthMap(width=w, height=h, values=arr),
        detections=tuple(detections),
        vip_mask=vip_mask,
        road_mask=road_mask,
        instance_masks=instance_masks or {},
    )


def det(label, x1, y1, x2, y2, confidence=0.9, track_id=None):
    return Detection(
        class_label=label,
        bbox=BoundingBox(x1, y1, x2, y2),
        confidence=confidence,
        track_id=track_id,
    )
