#include "nss/geom.hpp"

#include "nss/error.hpp"

#include <cmath>
#include <string>

namespace nss {

void CameraIntrinsics::validate() const {
    if (width < 1 || height < 1) throw DomainError("intrinsics: width and height must be >= 1");
    if (!(fx > 0.0) || !(fy > 0.0)) throw DomainError("intrinsics: focal lengths must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
        throw DomainError("intrinsics: principal point outside the image");
}

CameraIntrinsics CameraIntrinsics::from_fov(int width, int height, double fov_x_radians) {
    CameraIntrinsics intr;
    intr.width = width;
    intr.height = height;
    intr.fx = 0.5 * width / std::tan(0.5 * fov_x_radians);
    intr.fy = intr.fx;
    intr.cx = 0.5 * width;
    intr.cy = 0.5 * height;
    return intr;
}

void Pose::validate(double tolerance) const {
    const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (!(ortho <= tolerance)) throw DomainError("pose: rotation is not orthonormal");
    if (!(std::abs(rotation.determinant() - 1.0) <= tolerance))
        throw DomainError("pose: rotation determinant is not +1");
    if (!translation.allFinite()) throw DomainError("pose: non-finite translation");
}

Eigen::Matrix4d Pose::matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
}

Pose Pose::from_matrix(const Eigen::Matrix4d& m) {
    Pose pose;
    pose.rotation = m.topLeftCorner<3, 3>();
    pose.translation = m.topRightCorner<3, 1>();
    return pose;
}

Pose Pose::look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& world_up) {
    const Eigen::Vector3d forward = (target - eye).normalized();
    Eigen::Vector3d right = forward.cross(world_up);
    if (right.norm() < 1e-9) right = forward.cross(Eigen::Vector3d::UnitX());
    right.normalize();
    const Eigen::Vector3d down = forward.cross(right);
    Pose pose;
    pose.rotation.col(0) = right;
    pose.rotation.col(1) = down;
    pose.rotation.col(2) = forward;
    pose.translation = eye;
    return pose;
}

Eigen::Vector3d pixel_direction_camera(const CameraIntrinsics& intr, const Eigen::Vector2d& px) {
    return {(px.x() + 0.5 - intr.cx) / intr.fx, (px.y() + 0.5 - intr.cy) / intr.fy, 1.0};
}

Ray pixel_ray(const CameraIntrinsics& intr, const Pose& pose, const Eigen::Vector2d& px) {
    if (!intr.contains(px))
        throw DomainError("pixel_ray: pixel (" + std::to_string(px.x()) + ", " + std::to_string(px.y()) +
                          ") outside the image");
    Ray ray;
    ray.origin = pose.translation;
    ray.direction = (pose.rotation * pixel_direction_camera(intr, px)).normalized();
    return ray;
}

std::optional<Projection> project(const CameraIntrinsics& intr, const Pose& pose, const Eigen::Vector3d& point) {
    const Eigen::Vector3d cam = pose.to_camera(point);
    if (!(cam.z() > 1e-9)) return std::nullopt;
    Projection out;
    out.pixel = {intr.fx * cam.x() / cam.z() + intr.cx - 0.5, intr.fy * cam.y() / cam.z() + intr.cy - 0.5};
    out.distance = cam.norm();
    return out;
}

Eigen::Vector3d back_project(const CameraIntrinsics& intr, const Pose& pose, const Eigen::Vector2d& px,
                             double ray_distance) {
    if (!(ray_distance > 0.0)) throw DomainError("back_project: ray distance must be positive");
    if (!intr.contains(px)) throw DomainError("back_project: pixel outside the image");
    const Eigen::Vector3d dir = pixel_direction_camera(intr, px).normalized();
    return pose.to_world(ray_distance * dir);
}

bool nearest_pixel(const CameraIntrinsics& intr, const Eigen::Vector2d& px, int& x, int& y) {
    const double fx = std::floor(px.x() + 0.5);
    const double fy = std::floor(px.y() + 0.5);
    if (!(fx >= 0.0 && fy >= 0.0 && fx < intr.width && fy < intr.height)) return false;
    x = static_cast<int>(fx);
    y = static_cast<int>(fy);
    return true;
}

}  // namespace nss
