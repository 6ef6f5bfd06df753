#include "nss/trainer.hpp"

#include "nss/adam.hpp"
#include "nss/error.hpp"
#include "nss/parallel.hpp"
#include "nss/rng.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace nss {

namespace {

constexpr std::size_t kChunkRays = 64;
constexpr std::uint64_t kPickStream = 0x5049434B00000000ull;

}  // namespace

std::string to_string(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::near_surface: return "near_surface";
        case SamplerKind::full_range: return "full_range";
        case SamplerKind::hierarchical: return "hierarchical";
    }
    return "unknown";
}

SamplerKind parse_sampler(const std::string& name) {
    if (name == "near_surface") return SamplerKind::near_surface;
    if (name == "full_range") return SamplerKind::full_range;
    if (name == "hierarchical" || name == "hierarchical_baseline") return SamplerKind::hierarchical;
    throw ConfigError("sampler: unknown value '" + name + "' (near_surface, full_range, hierarchical)");
}

std::string to_string(DepthSource source) { return source == DepthSource::ground_truth ? "gt" : "cloud"; }

DepthSource parse_depth_source(const std::string& name) {
    if (name == "gt" || name == "ground_truth") return DepthSource::ground_truth;
    if (name == "cloud" || name == "estimated") return DepthSource::cloud;
    throw ConfigError("depth_source: unknown value '" + name + "' (gt, cloud)");
}

NearSurfaceConfig SamplerConfig::near_surface() const {
    return {alpha, n_samples, near_clip, shared_jitter};
}

FullRangeConfig SamplerConfig::full_range() const {
    return {t_near, t_far, n_samples, range_scale};
}

void SamplerConfig::validate() const {
    near_surface().validate();
    full_range().validate();
    if (kind == SamplerKind::hierarchical && n_samples < 2)
        throw ConfigError("n_samples: hierarchical sampling needs at least 2");
}

void TrainConfig::validate() const {
    if (iterations < 1) throw ConfigError("iterations: must be >= 1");
    if (batch_rays < 1) throw ConfigError("batch_rays: must be >= 1");
    if (!(lr > 0.0) || !(lr_dropped > 0.0)) throw ConfigError("lr: must be positive");
    if (!(lr_drop_fraction >= 0.0 && lr_drop_fraction <= 1.0)) throw ConfigError("lr_drop_fraction: must lie in [0, 1]");
    if (log_every < 1) throw ConfigError("log_every: must be >= 1");
    sampler.validate();
    field.validate();
    render.validate();
}

std::int64_t TrainConfig::drop_step() const {
    return static_cast<std::int64_t>(std::llround(lr_drop_fraction * static_cast<double>(iterations)));
}

void EvalConfig::validate() const {
    sampler.validate();
    render.validate();
    if (fill_holes) hole_fill.validate();
}

std::vector<SampleSet> sample_rays(const SamplerConfig& cfg, std::span<const Ray> rays, std::span<const double> depths,
                                   std::span<const std::uint64_t> stream_ids, std::uint64_t seed,
                                   const RadianceField<float>& field, const RenderConfig& render) {
    std::vector<SampleSet> out(rays.size());
    const FullRangeConfig full = cfg.full_range();
    if (cfg.kind == SamplerKind::near_surface) {
        const NearSurfaceConfig near = cfg.near_surface();
        for (std::size_t r = 0; r < rays.size(); ++r) {
            Rng rng = Rng::stream(seed, stream_ids[r]);
            const double d = depths.empty() ? 0.0 : depths[r];
            out[r] = d > 0.0 ? near_surface_samples(d, near, rng) : full_range_stratified(full, rng);
        }
        return out;
    }
    if (cfg.kind == SamplerKind::full_range) {
        for (std::size_t r = 0; r < rays.size(); ++r) {
            Rng rng = Rng::stream(seed, stream_ids[r]);
            out[r] = full_range_stratified(full, rng);
        }
        return out;
    }
    FullRangeConfig coarse_cfg = full;
    coarse_cfg.n_samples = cfg.n_samples / 2;
    const int n_fine = cfg.n_samples - coarse_cfg.n_samples;
    std::vector<Rng> rngs;
    rngs.reserve(rays.size());
    std::vector<SampleSet> coarse(rays.size());
    for (std::size_t r = 0; r < rays.size(); ++r) {
        rngs.push_back(Rng::stream(seed, stream_ids[r]));
        coarse[r] = full_range_stratified(coarse_cfg, rngs.back());
    }
    std::vector<CompositeResult> details;
    render_rays(field, rays, std::span<const SampleSet>(coarse), render, &details);
    for (std::size_t r = 0; r < rays.size(); ++r)
        out[r] = inverse_cdf_resample(coarse[r], details[r].weights, n_fine, rngs[r]);
    return out;
}

TrainResult train(const Dataset& dataset, const TrainConfig& cfg,
                  const std::function<void(const TrainLogEntry&)>& on_log) {
    cfg.validate();
    if (dataset.frames.empty()) throw ConfigError("train: dataset has no frames");
    const bool need_depth = cfg.sampler.kind == SamplerKind::near_surface || cfg.skip_background_rays;
    if (need_depth && !dataset.has_depth())
        throw ConfigError("train: near-surface sampling requires ground-truth depth for every training frame");

    const auto start = std::chrono::steady_clock::now();
    const auto& intr = dataset.intrinsics;
    const std::size_t pixels_per_frame = static_cast<std::size_t>(intr.width) * intr.height;

    // ray pool as flat (frame * pixels_per_frame + pixel) indices
    std::vector<std::size_t> pool;
    std::size_t pool_size = dataset.frames.size() * pixels_per_frame;
    if (cfg.skip_background_rays) {
        for (std::size_t f = 0; f < dataset.frames.size(); ++f)
            for (std::size_t p = 0; p < pixels_per_frame; ++p)
                if ((*dataset.frames[f].depth)[p] > 0.0) pool.push_back(f * pixels_per_frame + p);
        pool_size = pool.size();
        if (pool_size == 0) throw ConfigError("train: no foreground pixels to sample");
    }

    TrainResult result{RadianceField<float>(cfg.field), 0, 0.0, {}, 0.0};
    RadianceField<float>& field = result.field;
    field.initialize(mix64(cfg.seed) ^ 0x494E4954ull);
    AdamState<float> adam(field.num_params(), LrSchedule{cfg.lr, cfg.drop_step(), cfg.lr_dropped});
    const auto blocks = field.param_blocks();

    const std::size_t batch = static_cast<std::size_t>(cfg.batch_rays);
    const std::size_t n_chunks = (batch + kChunkRays - 1) / kChunkRays;
    std::vector<AlignedVector<float>> chunk_grads(n_chunks, AlignedVector<float>(field.num_params()));
    std::vector<double> chunk_sse(n_chunks);
    AlignedVector<float> grad(field.num_params());
    std::vector<Ray> rays(batch);
    std::vector<Rgb> targets(batch);
    std::vector<double> depths(batch);
    std::vector<std::uint64_t> ids(batch);
    const double grad_scale = 1.0 / (3.0 * static_cast<double>(batch));

    for (std::int64_t it = 0; it < cfg.iterations; ++it) {
        Rng pick = Rng::stream(cfg.seed, kPickStream + static_cast<std::uint64_t>(it));
        for (std::size_t r = 0; r < batch; ++r) {
            std::size_t flat = static_cast<std::size_t>(pick.below(pool_size));
            if (cfg.skip_background_rays) flat = pool[flat];
            const std::size_t f = flat / pixels_per_frame;
            const std::size_t p = flat % pixels_per_frame;
            const int x = static_cast<int>(p % static_cast<std::size_t>(intr.width));
            const int y = static_cast<int>(p / static_cast<std::size_t>(intr.width));
            const Frame& frame = dataset.frames[f];
            rays[r] = pixel_ray(intr, frame.pose, Eigen::Vector2d(x, y));
            targets[r] = frame.color(x, y);
            depths[r] = frame.depth ? (*frame.depth)(x, y) : 0.0;
            ids[r] = static_cast<std::uint64_t>(it) * batch + r;
        }

        parallel_for(n_chunks, cfg.threads, [&](std::size_t c) {
            const std::size_t lo = c * kChunkRays;
            const std::size_t n = std::min(kChunkRays, batch - lo);
            const std::span<const Ray> chunk_rays(rays.data() + lo, n);
            const auto samples = sample_rays(cfg.sampler, chunk_rays, std::span<const double>(depths.data() + lo, n),
                                             std::span<const std::uint64_t>(ids.data() + lo, n), cfg.seed, field,
                                             cfg.render);
            std::fill(chunk_grads[c].begin(), chunk_grads[c].end(), 0.0f);
            chunk_sse[c] = accumulate_squared_error_gradient(field, chunk_rays, std::span<const SampleSet>(samples),
                                                             std::span<const Rgb>(targets.data() + lo, n), cfg.render,
                                                             grad_scale, std::span<float>(chunk_grads[c]));
        });

        std::copy(chunk_grads[0].begin(), chunk_grads[0].end(), grad.begin());
        for (std::size_t c = 1; c < n_chunks; ++c)
            for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += chunk_grads[c][i];
        const double loss = std::accumulate(chunk_sse.begin(), chunk_sse.end(), 0.0) / (3.0 * static_cast<double>(batch));
        if (!std::isfinite(loss)) throw NumericError("train: non-finite loss at iteration " + std::to_string(it));

        if (it == 0 || (it + 1) % cfg.log_every == 0 || it + 1 == cfg.iterations) {
            result.log.push_back({it, loss});
            if (on_log) on_log(result.log.back());
        }
        adam_step(adam, field.params(), std::span<const float>(grad), blocks);
    }

    result.steps = adam.step;
    result.final_lr = adam.schedule.at(adam.step - 1);
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

DepthImage estimate_depth(const PointCloud& cloud, const CameraIntrinsics& intr, const Pose& pose,
                          const HoleFillConfig& cfg, bool fill) {
    ProjectedDepth projected = project_cloud_depth(cloud, intr, pose);
    if (fill) projected = fill_holes(projected, cfg);
    return projected.depth;
}

ColorImage render_view(const RadianceField<float>& field, const CameraIntrinsics& intr, const Pose& pose,
                       const DepthImage* depth, const SamplerConfig& sampler, const RenderConfig& render,
                       std::uint64_t seed, int threads) {
    const std::size_t n_pixels = static_cast<std::size_t>(intr.width) * intr.height;
    constexpr std::size_t kChunk = 256;
    const std::size_t n_chunks = (n_pixels + kChunk - 1) / kChunk;
    ColorImage image(intr.width, intr.height, Rgb::Zero());
    parallel_for(n_chunks, threads, [&](std::size_t c) {
        const std::size_t lo = c * kChunk;
        const std::size_t n = std::min(kChunk, n_pixels - lo);
        std::vector<Ray> rays(n);
        std::vector<double> depths(n, 0.0);
        std::vector<std::uint64_t> ids(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t p = lo + i;
            const int x = static_cast<int>(p % static_cast<std::size_t>(intr.width));
            const int y = static_cast<int>(p / static_cast<std::size_t>(intr.width));
            rays[i] = pixel_ray(intr, pose, Eigen::Vector2d(x, y));
            if (depth) depths[i] = (*depth)[p];
            ids[i] = p;
        }
        const auto samples = sample_rays(sampler, rays, depths, ids, seed, field, render);
        const auto colors = render_rays(field, std::span<const Ray>(rays), std::span<const SampleSet>(samples), render);
        for (std::size_t i = 0; i < n; ++i) image[lo + i] = colors[i];
    });
    return image;
}

EvalResult evaluate(const RadianceField<float>& field, const Dataset& test, const PointCloud* cloud,
                    const EvalConfig& cfg) {
    cfg.validate();
    const bool near = cfg.sampler.kind == SamplerKind::near_surface;
    if (near && cfg.depth_source == DepthSource::cloud && !cloud)
        throw ConfigError("evaluate: depth source 'cloud' needs a point cloud");
    if (near && cfg.depth_source == DepthSource::ground_truth && !test.has_depth())
        throw ConfigError("evaluate: depth source 'gt' needs ground-truth depth for every test view");
    EvalResult result;
    double sum = 0.0;
    for (std::size_t v = 0; v < test.frames.size(); ++v) {
        const Frame& frame = test.frames[v];
        ViewResult view;
        view.view = v;
        if (near) {
            view.depth = cfg.depth_source == DepthSource::ground_truth
                             ? *frame.depth
                             : estimate_depth(*cloud, test.intrinsics, frame.pose, cfg.hole_fill, cfg.fill_holes);
        }
        view.rendered = render_view(field, test.intrinsics, frame.pose, near ? &view.depth : nullptr, cfg.sampler,
                                    cfg.render, mix64(cfg.seed) ^ mix64(0x4556414Cull + v), cfg.threads);
        view.psnr = psnr(view.rendered, frame.color, frame.has_depth() ? &frame.background : nullptr);
        sum += view.psnr;
        result.views.push_back(std::move(view));
    }
    result.mean_psnr = result.views.empty() ? 0.0 : sum / static_cast<double>(result.views.size());
    return result;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string ExperimentReport::to_json() const {
    const auto number = [](double v) -> nlohmann::json {
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        return v;
    };
    nlohmann::json j;
    j["config_hash"] = config_hash;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json views = nlohmann::json::array();
        for (double p : row.view_psnr) views.push_back(number(p));
        j["rows"].push_back({{"id", row.id}, {"label", row.label}, {"mean_psnr", number(row.mean_psnr)}, {"view_psnr", views}});
    }
    return j.dump(2) + "\n";
}

}  // namespace nss
