#pragma once

#include "nss/geom.hpp"
#include "nss/image.hpp"
#include "nss/pointcloud.hpp"

#include <cstddef>
#include <cstdint>

namespace nss {

enum class Provenance : std::uint8_t { empty = 0, from_cloud = 1, filled = 2 };

/// Which pixels of the M x M window enter the mean and standard deviation.
enum class HoleStatistics {
    /// Every window pixel, zeros included (the center hole contributes p = 0).
    whole_window,
    /// Nonzero pixels only; a constant window (sigma below 1e-12) counts as surface.
    nonzero_only,
};

struct HoleFillConfig {
    /// Threshold on (mu - p) / sigma.
    double kappa = 2.0;
    /// Odd window size M.
    int window = 11;
    HoleStatistics statistics = HoleStatistics::whole_window;

    void validate() const;
};

struct ProjectedDepth {
    DepthImage depth;
    Image<Provenance> provenance;

    std::size_t count(Provenance p) const;
};

/// Nearest cloud point per pixel (ties to the lowest point index).
ProjectedDepth project_cloud_depth(const PointCloud& cloud, const CameraIntrinsics& intr, const Pose& pose);

struct WindowStats {
    /// Window pixels inside the image.
    int area = 0;
    int nonzero = 0;
    double mean = 0.0;
    double stddev = 0.0;
    /// Mean of the nonzero pixels; the fill value.
    double nonzero_mean = 0.0;
};

/// Statistics of the window centered at (x, y), clamped to the image.
WindowStats window_stats(const DepthImage& depth, int x, int y, const HoleFillConfig& cfg);

/// True when the zero pixel at (x, y) is judged missing surface rather than
/// background: at least ceil(area / 4) nonzero neighbors and (mu - 0) / sigma > kappa.
/// Returns false for pixels that are not holes.
bool classify_hole(const ProjectedDepth& depth, int x, int y, const HoleFillConfig& cfg);

/// Single pass: every hole classified as surface receives the mean of the
/// nonzero pixels in its window, computed on the unfilled input.
ProjectedDepth fill_holes(const ProjectedDepth& depth, const HoleFillConfig& cfg);

}  // namespace nss
