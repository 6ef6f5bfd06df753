#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>

namespace nss {

/// Pinhole intrinsics. Pixel (i, j) covers [i, i+1) x [j, j+1) in the image
/// plane; its ray passes through (i + 0.5, j + 0.5).
struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.5;
    double cy = 0.5;
    int width = 1;
    int height = 1;

    /// Throws DomainError if any field violates its invariant.
    void validate() const;

    bool contains(const Eigen::Vector2d& px) const {
        return px.x() >= -0.5 && px.y() >= -0.5 && px.x() < width - 0.5 && px.y() < height - 0.5;
    }

    /// Intrinsics for a square image with the given horizontal field of view.
    static CameraIntrinsics from_fov(int width, int height, double fov_x_radians);

    bool operator==(const CameraIntrinsics&) const = default;
};

/// Rigid camera-to-world transform. Camera frame is +x right, +y down, +z forward.
struct Pose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    void validate(double tolerance = 1e-6) const;

    Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const {
        return rotation.transpose() * (world - translation);
    }
    Eigen::Vector3d to_world(const Eigen::Vector3d& cam) const { return rotation * cam + translation; }

    Eigen::Matrix4d matrix() const;
    static Pose from_matrix(const Eigen::Matrix4d& m);

    /// Camera at `eye` looking at `target`; image "up" follows `world_up`.
    static Pose look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                        const Eigen::Vector3d& world_up = Eigen::Vector3d::UnitZ());
};

struct Ray {
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();

    Eigen::Vector3d at(double t) const { return origin + t * direction; }
};

/// Result of projecting a world point. `pixel` is continuous and expressed in
/// pixel-index space (the center of pixel (i, j) is at (i, j)); `distance` is
/// the Euclidean distance from the camera center, not z-depth.
struct Projection {
    Eigen::Vector2d pixel;
    double distance;
};

/// Ray through the center of pixel `px` (pixel-index space). Throws DomainError
/// when `px` lies outside the image.
Ray pixel_ray(const CameraIntrinsics& intr, const Pose& pose, const Eigen::Vector2d& px);

/// Unnormalized camera-frame direction (z = 1) through pixel `px`.
Eigen::Vector3d pixel_direction_camera(const CameraIntrinsics& intr, const Eigen::Vector2d& px);

/// std::nullopt when the point is behind the camera (camera-frame z <= 1e-9).
std::optional<Projection> project(const CameraIntrinsics& intr, const Pose& pose, const Eigen::Vector3d& point);

/// Point at Euclidean distance `ray_distance` along the ray of pixel `px`.
Eigen::Vector3d back_project(const CameraIntrinsics& intr, const Pose& pose, const Eigen::Vector2d& px,
                             double ray_distance);

/// Nearest integer pixel of a continuous projection, or false if off-image.
bool nearest_pixel(const CameraIntrinsics& intr, const Eigen::Vector2d& px, int& x, int& y);

}  // namespace nss
