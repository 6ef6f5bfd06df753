#include "nss/pointcloud.hpp"

#include "nss/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace nss {

void RefineConfig::validate() const {
    if (!(tau > 0.0)) throw ConfigError("tau: must be positive");
    if (stride < 1) throw ConfigError("stride: must be >= 1");
}

ZBuffer rasterize_nearest(const PointCloud& cloud, const CameraIntrinsics& intr, const Pose& pose) {
    ZBuffer zb{Image<double>(intr.width, intr.height, std::numeric_limits<double>::infinity()),
               Image<std::int64_t>(intr.width, intr.height, -1)};
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        const auto proj = project(intr, pose, cloud.points[i].position);
        if (!proj) continue;
        int x = 0;
        int y = 0;
        if (!nearest_pixel(intr, proj->pixel, x, y)) continue;
        // strict < keeps the lowest index among equal distances
        if (proj->distance < zb.distance(x, y)) {
            zb.distance(x, y) = proj->distance;
            zb.index(x, y) = static_cast<std::int64_t>(i);
        }
    }
    return zb;
}

PointCloud cloud_from_depth(const CameraIntrinsics& intr, const Pose& pose, const DepthImage& depth,
                            const ColorImage& color, int source_frame) {
    if (depth.width() != intr.width || depth.height() != intr.height || color.width() != intr.width ||
        color.height() != intr.height)
        throw DomainError("cloud_from_depth: image size does not match intrinsics");
    PointCloud cloud;
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            const double d = depth(x, y);
            if (!(d > 0.0)) continue;
            cloud.points.push_back({back_project(intr, pose, Eigen::Vector2d(x, y), d), color(x, y), source_frame});
        }
    }
    return cloud;
}

std::size_t refine_with_view(PointCloud& cloud, const CameraIntrinsics& intr, const Frame& frame, double tau,
                             int source_frame) {
    if (!frame.depth) throw DataError("refine: frame " + std::to_string(source_frame) + " has no depth image");
    const DepthImage& gt = *frame.depth;
    const ZBuffer zb = rasterize_nearest(cloud, intr, frame.pose);
    const std::size_t before = cloud.size();
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            const double d_gt = gt(x, y);
            if (!(d_gt > 0.0)) continue;  // nothing to validate or back-project
            if (zb.index(x, y) >= 0 && redundancy_check(zb.distance(x, y), d_gt, tau)) continue;
            cloud.points.push_back(
                {back_project(intr, frame.pose, Eigen::Vector2d(x, y), d_gt), frame.color(x, y), source_frame});
        }
    }
    return cloud.size() - before;
}

PointCloud generate_refined_cloud(const Dataset& dataset, const RefineConfig& cfg, RefineTrace* trace) {
    cfg.validate();
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < dataset.frames.size(); i += static_cast<std::size_t>(cfg.stride)) order.push_back(i);
    if (order.size() < 2)
        throw ConfigError("point cloud generation needs at least 2 frames after stride subsetting, got " +
                          std::to_string(order.size()));
    for (std::size_t i : order)
        if (!dataset.frames[i].depth)
            throw DataError("point cloud generation: frame " + std::to_string(i) + " has no depth image");

    const Frame& first = dataset.frames[order.front()];
    PointCloud cloud = cloud_from_depth(dataset.intrinsics, first.pose, *first.depth, first.color,
                                        static_cast<int>(order.front()));
    if (trace) {
        trace->sizes = {cloud.size()};
        trace->frames = {order.front()};
    }
    for (std::size_t k = 1; k < order.size(); ++k) {
        refine_with_view(cloud, dataset.intrinsics, dataset.frames[order[k]], cfg.tau, static_cast<int>(order[k]));
        if (trace) {
            trace->sizes.push_back(cloud.size());
            trace->frames.push_back(order[k]);
        }
    }
    return cloud;
}

}  // namespace nss
