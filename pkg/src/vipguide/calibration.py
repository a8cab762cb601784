"""Quadratic mapping from relative depth values to metric distance.

The onboard depth network emits only *relative* depth (REV, 16-bit,
larger = nearer). A short ground-truth collection — laser-measured
distances paired with observed REVs — fits distance = a*rev^2 + b*rev + c
with rev normalized to [0,1]. The fit is plain least squares on the
quadratic design matrix.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import CalibrationError, EmptyRegionError
from .perception import Detection, PerceptionFrame, REV_MAX


@dataclass(frozen=True)
class CalibrationSample:
    rev: float       # normalized relative depth in [0,1]
    distance: float  # meters

    def __post_init__(self):
        if not 0.0 <= self.rev <= 1.0:
            raise CalibrationError(f"rev {self.rev} outside [0,1]")
        if self.distance <= 0:
            raise CalibrationError(f"distance {self.distance} not positive")


@dataclass(frozen=True)
class CalibrationModel:
    a: float
    b: float
    c: float
    rmse: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples < 3:
            raise CalibrationError(f"model from {self.n_samples} samples")
        if self.rmse < 0:
            raise CalibrationError(f"negative rmse {self.rmse}")


def fit(samples: list[CalibrationSample]) -> CalibrationModel:
    """Least-squares quadratic fit; requires >= 3 distinct rev values."""
    if len(samples) < 3:
        raise CalibrationError(f"need >= 3 samples, got {len(samples)}")
    revs = np.array([s.rev for s in samples], dtype=np.float64)
    dists = np.array([s.distance for s in samples], dtype=np.float64)
    if len(set(revs.tolist())) < 3:
        raise CalibrationError("need >= 3 distinct rev values for a quadratic fit")
    design = np.column_stack([revs**2, revs, np.ones_like(revs)])
    coeffs, _, rank, _ = np.linalg.lstsq(design, dists, rcond=None)
    if rank < 3:
        raise CalibrationError("rank-deficient design matrix")
    a, b, c = (float(v) for v in coeffs)
    residuals = design @ coeffs - dists
    training_rmse = float(np.sqrt(np.mean(residuals**2)))
    return CalibrationModel(a=a, b=b, c=c, rmse=training_rmse, n_samples=len(samples))


def predict(model: CalibrationModel, rev: float) -> float:
    """Metric distance for a normalized rev, clamped below at 0 m."""
    if not 0.0 <= rev <= 1.0:
        raise CalibrationError(f"rev {rev} outside [0,1]")
    return max(0.0, model.a * rev * rev + model.b * rev + model.c)


def rmse(model: CalibrationModel, samples: list[CalibrationSample]) -> float:
    """Root-mean-square prediction error over a sample set."""
    if not samples:
        raise CalibrationError("rmse over empty sample set")
    err2 = [(predict(model, s.rev) - s.distance) ** 2 for s in samples]
    return math.sqrt(sum(err2) / len(err2))


def region_rev(frame: PerceptionFrame, det: Detection) -> int:
    """Representative REV for a detection: median over bbox (∩ instance mask).

    Even pixel counts take the lower of the two middle values, so the
    result is always an actual pixel value.
    """
    bbox = det.bbox
    patch = frame.depth.values[bbox.y1 : bbox.y2, bbox.x1 : bbox.x2]
    if det.track_id is not None and det.track_id in frame.instance_masks:
        mask = frame.instance_masks[det.track_id].decode()
        patch = patch[mask[bbox.y1 : bbox.y2, bbox.x1 : bbox.x2]]
    values = np.sort(patch, axis=None)
    if values.size == 0:
        raise EmptyRegionError(
            f"no depth pixels under detection {det.class_label} {bbox.as_list()}"
        )
    return int(values[(values.size - 1) // 2])


def detection_distance(
    frame: PerceptionFrame, det: Detection, model: CalibrationModel
) -> float:
    """Metric distance to a detected object via its representative REV."""
    return predict(model, region_rev(frame, det) / REV_MAX)


# -- persistence ---------------------------------------------------------------


def save_model(path, model: CalibrationModel) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(asdict(model), fh, separators=(",", ":"))
        fh.write("\n")


def load_model(path) -> CalibrationModel:
    with open(path, "r", encoding="ascii") as fh:
        obj = json.load(fh)
    try:
        return CalibrationModel(
            a=float(obj["a"]),
            b=float(obj["b"]),
            c=float(obj["c"]),
            rmse=float(obj["rmse"]),
            n_samples=int(obj["n_samples"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CalibrationError(f"bad model file {path}: {exc}") from exc


def load_samples_csv(path) -> list[CalibrationSample]:
    """Read calibration pairs from a CSV with header `rev,distance_m`."""
    with open(path, "r", encoding="ascii", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != [
            "rev",
            "distance_m",
        ]:
            raise CalibrationError(
                f"{path}: expected header 'rev,distance_m', got {reader.fieldnames}"
            )
        samples = []
        for row in reader:
            try:
                samples.append(
                    CalibrationSample(
                        rev=float(row["rev"]), distance=float(row["distance_m"])
                    )
                )
            except (TypeError, ValueError) as exc:
                raise CalibrationError(f"{path}: bad row {row}: {exc}") from exc
    return samples


def save_samples_csv(path, samples: list[CalibrationSample]) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rev", "distance_m"])
        for s in samples:
            writer.writerow([repr(s.rev), repr(s.distance)])
