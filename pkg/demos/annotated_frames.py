"""Seeing what the planner sees.

Writes a short annotated image sequence for the parked-vehicles scene:
the depth map as grayscale, obstacle boxes tinted by severity (red
danger, yellow warning), the pedestrian in blue, and the chosen heading
partition outlined in green. Output is plain binary PPM — any image
viewer opens it.
"""
import os
import sys

from vipguide import (
    CalibrationSample,
    Pipeline,
    ScenarioSpec,
    annotate_frame,
    calibration_frames,
    default_config,
    fit,
    generate,
    partition_bounds,
    region_rev,
    write_ppm,
)


def depth_model():
    samples = []
    for frame, z in calibration_frames([1.0 + 0.5 * i for i in range(19)]):
        rev = region_rev(frame, frame.detections[0]) / 65535.0
        samples.append(CalibrationSample(rev=rev, distance=z))
    return fit(samples)


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "annotated"
    os.makedirs(out_dir, exist_ok=True)

    config = default_config()
    pipe = Pipeline(config, depth_model())
    spec = ScenarioSpec(kind="parked_vehicles", seed=1, n_frames=12)
    partitions = partition_bounds(spec.camera.width, config.planner.n_partitions)

    for frame, _ in generate(spec):
        decision, _ = pipe.process_frame(frame)
        image = annotate_frame(frame, pipe.last_detections, decision, partitions)
        path = os.path.join(out_dir, f"frame_{frame.frame_id:05d}.ppm")
        write_ppm(path, image)
        print(f"wrote {path}")

    print(f"\nopen the PPMs in {out_dir}/ to watch the heading hold right")


if __name__ == "__main__":
    main()
