"""One frame, dissected.

Runs the per-frame avoidance logic on a parked-vehicles scene and shows
its working: the three vertical partitions, each partition's mean-depth
score and widest free gap, the per-obstacle severity calls, and the
heading the pedestrian is finally given.
"""
from vipguide import (
    CalibrationSample,
    ScenarioSpec,
    calibration_frames,
    default_config,
    detection_distance,
    fit,
    free_space,
    generate,
    heading_angle,
    partition_bounds,
    region_rev,
    safety_distance,
    width_threshold_px,
)
from vipguide.local_planner import decide, partition_profiles


def depth_model():
    samples = []
    for frame, z in calibration_frames([1.0 + 0.5 * i for i in range(19)]):
        rev = region_rev(frame, frame.detections[0]) / 65535.0
        samples.append(CalibrationSample(rev=rev, distance=z))
    return fit(samples)


def main():
    cfg = default_config()
    model = depth_model()
    spec = ScenarioSpec(kind="parked_vehicles", seed=1, n_frames=1)
    frame, truth = next(iter(generate(spec)))

    vip = frame.vip_detection
    d_vip = detection_distance(frame, vip, model)
    d_prime = safety_distance(cfg.geometry.walk_speed, cfg.geometry.t_detect,
                              cfg.geometry.t_react)
    print(f"pedestrian at {d_vip:.2f} m, safety distance d' = {d_prime:.2f} m")
    print()

    obstacles, rel = [], []
    for det in frame.detections:
        if det.class_label == "vip":
            continue
        d_rel = max(0.0, detection_distance(frame, det, model) - d_vip)
        obstacles.append(det)
        rel.append(d_rel)
        band = "danger" if d_rel <= d_prime else ("warning" if d_rel <= 2 * d_prime else "clear")
        print(f"  {det.class_label} at {d_rel:.2f} m ahead of the pedestrian -> {band}")
    print()

    partitions = partition_bounds(frame.width, cfg.planner.n_partitions)
    profiles = partition_profiles(frame.depth, partitions, obstacles, rel,
                                  d_prime, exclude=frame.vip_mask)
    gaps = free_space(obstacles, rel, d_prime, frame.width, partitions)
    print("  partition   columns      depth score   widest gap")
    for p, prof, (segs, widest) in zip(partitions, profiles, gaps):
        print(f"  {p.index:^9}   [{p.x_start:3d},{p.x_end:3d})"
              f"   {prof.h_score:11.1f}   {widest:4d} px  {list(segs)}")
    print()

    threshold = width_threshold_px(vip.bbox.width, cfg.planner.width_margin)
    outcome = decide(profiles, 1, threshold, cfg.geometry.hfov_deg, frame.width)
    print(f"pedestrian needs a {threshold} px gap "
          f"(bbox {vip.bbox.width} px with clearance margin)")
    print(f"decision: partition {outcome.partition}, "
          f"turn {heading_angle(partitions[outcome.partition], frame.width, cfg.geometry.hfov_deg):+.1f} deg "
          f"(scene expects partition {truth.expected_partition})")


if __name__ == "__main__":
    main()
