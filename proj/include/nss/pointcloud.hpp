#pragma once

#include "nss/dataio.hpp"
#include "nss/geom.hpp"
#include "nss/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace nss {

struct CloudPoint {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Rgb color = Rgb::Zero();
    /// Index of the frame that produced the point; -1 when unknown (e.g. read from PLY).
    int source_frame = -1;
};

/// Ordered by frame, then row-major pixel order.
struct PointCloud {
    std::vector<CloudPoint> points;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
};

/// Parameters of the iterative refinement.
struct RefineConfig {
    /// Redundancy threshold on |projected distance - ground-truth depth|, world units.
    double tau = 0.1;
    /// Use every `stride`-th training frame.
    int stride = 5;

    void validate() const;
};

/// Nearest-point depth buffer of a projected cloud. `index` is -1 where no
/// point lands.
struct ZBuffer {
    Image<double> distance;
    Image<std::int64_t> index;
};

/// Projects every point and keeps, per pixel, the smallest ray distance; ties
/// go to the lowest point index. Points behind the camera or off-image are skipped.
ZBuffer rasterize_nearest(const PointCloud& cloud, const CameraIntrinsics& intr, const Pose& pose);

/// One point per pixel with positive depth, back-projected at that ray distance.
PointCloud cloud_from_depth(const CameraIntrinsics& intr, const Pose& pose, const DepthImage& depth,
                            const ColorImage& color, int source_frame = 0);

/// True iff |d_tilde - d_gt| <= tau, the boundary included up to rounding of
/// the operands. A zero d_gt carries no ground truth; callers treat such
/// projections as non-redundant.
inline bool redundancy_check(double d_tilde, double d_gt, double tau) {
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(d_tilde), std::abs(d_gt));
    return std::abs(d_tilde - d_gt) <= tau + slack;
}

/// Per-iteration trace of the refinement.
struct RefineTrace {
    /// Cloud size after each processed subset frame (first entry is the seed frame).
    std::vector<std::size_t> sizes;
    /// Frame indices (into the full dataset) in processing order.
    std::vector<std::size_t> frames;
};

/// Steps 2-4 for one view: project `cloud`, test each ground-truth pixel for
/// redundancy, and append back-projected points where none explains it.
/// Returns the number of points added.
std::size_t refine_with_view(PointCloud& cloud, const CameraIntrinsics& intr, const Frame& frame, double tau,
                             int source_frame);

/// Seeds the cloud from the first subset frame and refines it with each following
/// subset frame in trajectory order. Throws ConfigError with fewer than two
/// subset frames, DataError when a subset frame lacks depth.
PointCloud generate_refined_cloud(const Dataset& dataset, const RefineConfig& cfg, RefineTrace* trace = nullptr);

}  // namespace nss
