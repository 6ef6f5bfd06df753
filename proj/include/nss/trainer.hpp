#pragma once

#include "nss/dataio.hpp"
#include "nss/depthmap.hpp"
#include "nss/field.hpp"
#include "nss/pointcloud.hpp"
#include "nss/render.hpp"
#include "nss/sampling.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nss {

enum class SamplerKind { near_surface, full_range, hierarchical };

std::string to_string(SamplerKind kind);
/// Throws ConfigError for unknown names.
SamplerKind parse_sampler(const std::string& name);

/// Ray sampling strategy shared by training and evaluation.
struct SamplerConfig {
    SamplerKind kind = SamplerKind::near_surface;
    /// Samples per ray. The hierarchical sampler splits it evenly into coarse and fine.
    int n_samples = 32;
    /// Half-range around the surface depth for near-surface sampling.
    double alpha = 0.125;
    double near_clip = 1e-3;
    bool shared_jitter = false;
    /// Full-range interval, also the fallback for rays without depth.
    double t_near = 2.0;
    double t_far = 6.0;
    double range_scale = 1.0;

    NearSurfaceConfig near_surface() const;
    FullRangeConfig full_range() const;
    void validate() const;
};

struct TrainConfig {
    std::int64_t iterations = 3000;
    int batch_rays = 512;
    double lr = 5e-4;
    double lr_dropped = 5e-5;
    /// Fraction of `iterations` after which the learning rate drops.
    double lr_drop_fraction = 0.625;
    SamplerConfig sampler;
    /// Exclude pixels whose ground-truth depth is 0 from the ray pool.
    bool skip_background_rays = false;
    FieldConfig field;
    RenderConfig render;
    std::uint64_t seed = 0;
    int log_every = 100;
    /// Worker threads for batch evaluation; 0 selects the hardware concurrency.
    int threads = 0;

    void validate() const;
    std::int64_t drop_step() const;
};

struct TrainLogEntry {
    std::int64_t iteration;
    double loss;
};

struct TrainResult {
    RadianceField<float> field;
    std::int64_t steps = 0;
    double final_lr = 0.0;
    std::vector<TrainLogEntry> log;
    double seconds = 0.0;
};

/// Fits a field to the dataset's color images. Each iteration draws
/// `batch_rays` pixels uniformly over all frames, samples each ray with the
/// configured sampler (near-surface uses the pixel's ground-truth depth and
/// falls back to full-range sampling where it is 0), renders, and takes one
/// ADAM step on the mean squared error. Throws ConfigError when near-surface
/// sampling is requested on a dataset without depth, NumericError on a
/// non-finite loss or gradient.
TrainResult train(const Dataset& dataset, const TrainConfig& cfg,
                  const std::function<void(const TrainLogEntry&)>& on_log = {});

enum class DepthSource { ground_truth, cloud };

std::string to_string(DepthSource source);
DepthSource parse_depth_source(const std::string& name);

struct EvalConfig {
    SamplerConfig sampler;
    DepthSource depth_source = DepthSource::cloud;
    HoleFillConfig hole_fill;
    bool fill_holes = true;
    RenderConfig render;
    std::uint64_t seed = 0;
    int threads = 0;

    void validate() const;
};

struct ViewResult {
    std::size_t view = 0;
    double psnr = 0.0;
    ColorImage rendered;
    /// Depth that drove near-surface sampling (empty for other samplers).
    DepthImage depth;
};

struct EvalResult {
    std::vector<ViewResult> views;
    double mean_psnr = 0.0;
};

/// Projected (and optionally hole-filled) cloud depth for one view.
DepthImage estimate_depth(const PointCloud& cloud, const CameraIntrinsics& intr, const Pose& pose,
                          const HoleFillConfig& cfg, bool fill);

/// Renders every view of `test` and scores it with background-masked PSNR
/// (unmasked when the view has no depth). Near-surface sampling takes its depth
/// from the point cloud or from the views' ground truth per `cfg.depth_source`.
EvalResult evaluate(const RadianceField<float>& field, const Dataset& test, const PointCloud* cloud,
                    const EvalConfig& cfg);

/// Renders one full image.
ColorImage render_view(const RadianceField<float>& field, const CameraIntrinsics& intr, const Pose& pose,
                       const DepthImage* depth, const SamplerConfig& sampler, const RenderConfig& render,
                       std::uint64_t seed, int threads = 0);

struct ExperimentRow {
    std::string id;
    std::string label;
    double mean_psnr = 0.0;
    std::vector<double> view_psnr;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    double seconds = 0.0;
    std::string config_hash;

    /// Deterministic JSON (no timing); +inf PSNR is written as the string "inf".
    std::string to_json() const;
};

/// 16 hex digits of FNV-1a over the text.
std::string fnv1a_hex(const std::string& text);

/// Per-pixel sample sets for a batch of rays, the order-independent building
/// block shared by training and evaluation. `depths` may be empty for samplers
/// that ignore depth. Hierarchical sampling evaluates `field` on the coarse set.
std::vector<SampleSet> sample_rays(const SamplerConfig& cfg, std::span<const Ray> rays, std::span<const double> depths,
                                   std::span<const std::uint64_t> stream_ids, std::uint64_t seed,
                                   const RadianceField<float>& field, const RenderConfig& render);

}  // namespace nss
