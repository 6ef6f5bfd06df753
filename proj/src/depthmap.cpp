#include "nss/depthmap.hpp"

#include "nss/error.hpp"

#include <algorithm>
#include <cmath>

namespace nss {

void HoleFillConfig::validate() const {
    if (!(kappa > 0.0)) throw ConfigError("kappa: must be positive");
    if (window < 3 || window % 2 == 0) throw ConfigError("window: must be odd and >= 3");
}

std::size_t ProjectedDepth::count(Provenance p) const {
    return static_cast<std::size_t>(std::count(provenance.pixels().begin(), provenance.pixels().end(), p));
}

ProjectedDepth project_cloud_depth(const PointCloud& cloud, const CameraIntrinsics& intr, const Pose& pose) {
    const ZBuffer zb = rasterize_nearest(cloud, intr, pose);
    ProjectedDepth out{DepthImage(intr.width, intr.height, 0.0),
                       Image<Provenance>(intr.width, intr.height, Provenance::empty)};
    for (std::size_t i = 0; i < zb.index.size(); ++i) {
        if (zb.index[i] < 0) continue;
        out.depth[i] = zb.distance[i];
        out.provenance[i] = Provenance::from_cloud;
    }
    return out;
}

WindowStats window_stats(const DepthImage& depth, int x, int y, const HoleFillConfig& cfg) {
    const int r = cfg.window / 2;
    const int x0 = std::max(0, x - r), x1 = std::min(depth.width() - 1, x + r);
    const int y0 = std::max(0, y - r), y1 = std::min(depth.height() - 1, y + r);
    WindowStats s;
    double sum = 0.0, sum_sq = 0.0;
    for (int yy = y0; yy <= y1; ++yy) {
        for (int xx = x0; xx <= x1; ++xx) {
            const double v = depth(xx, yy);
            ++s.area;
            if (v > 0.0) {
                ++s.nonzero;
                sum += v;
                sum_sq += v * v;
            }
        }
    }
    if (s.nonzero > 0) s.nonzero_mean = sum / s.nonzero;
    const int n = cfg.statistics == HoleStatistics::whole_window ? s.area : s.nonzero;
    if (n > 0) {
        s.mean = sum / n;
        s.stddev = std::sqrt(std::max(0.0, sum_sq / n - s.mean * s.mean));
    }
    return s;
}

bool classify_hole(const ProjectedDepth& depth, int x, int y, const HoleFillConfig& cfg) {
    if (depth.depth(x, y) != 0.0) return false;
    const WindowStats s = window_stats(depth.depth, x, y, cfg);
    const int min_support = (s.area + 3) / 4;
    if (s.nonzero == 0 || s.nonzero < min_support) return false;
    if (s.stddev < 1e-12) {
        // only reachable with nonzero-only statistics over a constant window
        return cfg.statistics == HoleStatistics::nonzero_only && s.mean > 0.0;
    }
    constexpr double p = 0.0;
    return (s.mean - p) / s.stddev > cfg.kappa;
}

ProjectedDepth fill_holes(const ProjectedDepth& depth, const HoleFillConfig& cfg) {
    cfg.validate();
    ProjectedDepth out = depth;
    for (int y = 0; y < depth.depth.height(); ++y) {
        for (int x = 0; x < depth.depth.width(); ++x) {
            if (depth.depth(x, y) != 0.0 || !classify_hole(depth, x, y, cfg)) continue;
            out.depth(x, y) = window_stats(depth.depth, x, y, cfg).nonzero_mean;
            out.provenance(x, y) = Provenance::filled;
        }
    }
    return out;
}

}  // namespace nss
