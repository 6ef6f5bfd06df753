#pragma once

#include "nss/dataio.hpp"
#include "nss/synthetic.hpp"

namespace nss::testing {

/// Noise-free sphere of radius 1 at the origin seen by `views` cameras on a
/// circle of radius 4 at 20 degrees elevation.
inline Dataset sphere_ring(int views, int resolution = 64, double noise = 0.0) {
    SynthOptions opts;
    opts.orbit.count = views;
    opts.orbit.turns = 1.0;
    opts.orbit.elevation_min_deg = 20.0;
    opts.orbit.elevation_max_deg = 20.0;
    opts.resolution = resolution;
    opts.depth_noise_sigma = noise;
    return synthesize_dataset(SyntheticSceneSpec::sphere_scene(Eigen::Vector3d::Zero(), 1.0), opts);
}

inline Frame make_frame(const SyntheticSceneSpec& scene, const CameraIntrinsics& intr, const Pose& pose) {
    SyntheticView v = render_synthetic(scene, intr, pose, 0.0, 0);
    Frame f;
    f.pose = pose;
    f.color = std::move(v.color);
    f.depth = std::move(v.depth);
    f.background = std::move(v.background);
    return f;
}

}  // namespace nss::testing
