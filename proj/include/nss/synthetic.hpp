#pragma once

#include "nss/dataio.hpp"
#include "nss/geom.hpp"
#include "nss/image.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nss {

struct Sphere {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double radius = 1.0;
    Rgb albedo = Rgb::Constant(0.8);
};

struct Box {
    Eigen::Vector3d min_corner = -Eigen::Vector3d::Ones();
    Eigen::Vector3d max_corner = Eigen::Vector3d::Ones();
    Rgb albedo = Rgb::Constant(0.8);
};

/// Procedural scene of spheres and axis-aligned boxes with Lambertian + ambient
/// shading under one directional light.
struct SyntheticSceneSpec {
    std::vector<Sphere> spheres;
    std::vector<Box> boxes;
    /// Unit vector pointing toward the light.
    Eigen::Vector3d light_direction = Eigen::Vector3d::UnitZ();
    double ambient = 0.3;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    /// Three-primitive tabletop scene inside [-1, 1]^3.
    static SyntheticSceneSpec default_scene();
    /// A single sphere.
    static SyntheticSceneSpec sphere_scene(const Eigen::Vector3d& center, double radius);

    std::string to_json() const;
    /// Throws ConfigError with a field path on bad input.
    static SyntheticSceneSpec from_json(const std::string& text);
};

struct SurfaceHit {
    double distance;
    Eigen::Vector3d normal;
    Rgb albedo;
};

/// Nearest intersection along the ray, if any.
std::optional<SurfaceHit> intersect(const SyntheticSceneSpec& scene, const Ray& ray);

struct SyntheticView {
    ColorImage color;
    DepthImage depth;
    Mask background;
};

/// Ground-truth color and depth by analytic ray casting. Depth is the exact
/// first-hit ray distance plus N(0, depth_noise_sigma) noise, clamped positive.
SyntheticView render_synthetic(const SyntheticSceneSpec& scene, const CameraIntrinsics& intr, const Pose& pose,
                               double depth_noise_sigma, std::uint64_t seed);

struct OrbitOptions {
    int count = 20;
    double radius = 4.0;
    /// Elevation above the z = 0 plane, in degrees, linearly varied along the trajectory.
    double elevation_min_deg = 20.0;
    double elevation_max_deg = 50.0;
    /// Number of full azimuth revolutions along the trajectory.
    double turns = 2.0;
    /// Azimuth shift in units of one view step; 0.5 interleaves with phase 0.
    double phase = 0.0;
};

/// Cameras on a spiral around the origin, in trajectory order, looking at the origin.
std::vector<Pose> orbit_poses(const OrbitOptions& opts);

struct SynthOptions {
    OrbitOptions orbit;
    int resolution = 64;
    double fov_deg = 40.0;
    double depth_noise_sigma = 0.0;
    double depth_scale = 1e-4;
    std::uint64_t seed = 0;

    void validate() const;
};

Dataset synthesize_dataset(const SyntheticSceneSpec& scene, const SynthOptions& opts);

}  // namespace nss
