#pragma once

#include "nss/field.hpp"
#include "nss/geom.hpp"
#include "nss/image.hpp"
#include "nss/sampling.hpp"

#include <limits>
#include <span>
#include <vector>

namespace nss {

struct RenderConfig {
    Rgb background_color = Rgb::Zero();
    /// Composite over white instead of `background_color`.
    bool white_background = false;
    /// Multiplier applied to densities before compositing.
    double sigma_scale = 1.0;

    Rgb background() const { return white_background ? Rgb::Ones() : background_color; }
    void validate() const;
};

struct CompositeResult {
    Rgb rgb = Rgb::Zero();
    std::vector<double> weights;
    /// Sum of weights (opacity).
    double acc = 0.0;
    /// Transmittance left after the last sample; acc + residual == 1.
    double residual = 1.0;
};

/// Emission-absorption quadrature: alpha_i = 1 - exp(-sigma_i delta_i),
/// T_i = prod_{j<i} (1 - alpha_j), w_i = T_i alpha_i, pixel = sum w_i c_i + T_{N+1} background.
/// Throws DomainError on length mismatch or negative density.
CompositeResult composite(const SampleSet& samples, std::span<const double> sigmas, std::span<const Rgb> rgbs,
                          const RenderConfig& cfg);

struct CompositeGradient {
    std::vector<double> d_sigma;
    std::vector<Rgb> d_rgb;
};

/// Vector-Jacobian product of `composite` for upstream gradient `d_pixel`.
CompositeGradient composite_backward(const SampleSet& samples, std::span<const double> sigmas,
                                     std::span<const Rgb> rgbs, const RenderConfig& cfg, const Rgb& d_pixel);

/// Sentinel for identical images.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// 10 log10(1 / MSE) over non-background pixels (all pixels without a mask),
/// channels averaged. Throws DomainError on size mismatch or an empty foreground.
double psnr(const ColorImage& rendered, const ColorImage& gt, const Mask* background = nullptr);

/// Evaluates the field along each ray at its sample positions and composites.
/// Rays with empty sample sets return the background.
template <class S>
std::vector<Rgb> render_rays(const RadianceField<S>& field, std::span<const Ray> rays,
                             std::span<const SampleSet> samples, const RenderConfig& cfg,
                             std::vector<CompositeResult>* details = nullptr);

template <class S>
Rgb render_ray(const RadianceField<S>& field, const Ray& ray, const SampleSet& samples, const RenderConfig& cfg) {
    return render_rays(field, std::span<const Ray>(&ray, 1), std::span<const SampleSet>(&samples, 1), cfg).front();
}

/// Renders the rays, accumulates `grad_scale * d(SSE)/d(params)` into `grad`,
/// and returns the summed squared error over rays and channels.
template <class S>
double accumulate_squared_error_gradient(const RadianceField<S>& field, std::span<const Ray> rays,
                                         std::span<const SampleSet> samples, std::span<const Rgb> targets,
                                         const RenderConfig& cfg, double grad_scale, std::span<S> grad);

// --- implementation ----------------------------------------------------------

namespace detail {

template <class S>
struct BatchGeometry {
    Eigen::Matrix3Xd positions;
    Eigen::Matrix3Xd directions;
    std::vector<std::size_t> offsets;  // per ray, into the sample columns
};

template <class S>
BatchGeometry<S> gather_samples(std::span<const Ray> rays, std::span<const SampleSet> samples) {
    if (rays.size() != samples.size()) throw DomainError("render: rays and sample sets differ in count");
    BatchGeometry<S> g;
    g.offsets.resize(rays.size() + 1, 0);
    for (std::size_t r = 0; r < rays.size(); ++r) g.offsets[r + 1] = g.offsets[r] + samples[r].size();
    const auto total = static_cast<Eigen::Index>(g.offsets.back());
    g.positions.resize(3, total);
    g.directions.resize(3, total);
    for (std::size_t r = 0; r < rays.size(); ++r) {
        for (std::size_t i = 0; i < samples[r].size(); ++i) {
            const auto col = static_cast<Eigen::Index>(g.offsets[r] + i);
            g.positions.col(col) = rays[r].at(samples[r].positions[i]);
            g.directions.col(col) = rays[r].direction;
        }
    }
    return g;
}

template <class S>
void unpack_ray(const typename RadianceField<S>::Output& out, std::size_t begin, std::size_t n,
                std::vector<double>& sigmas, std::vector<Rgb>& rgbs) {
    sigmas.resize(n);
    rgbs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto col = static_cast<Eigen::Index>(begin + i);
        sigmas[i] = static_cast<double>(out.sigma(col));
        rgbs[i] = out.rgb.col(col).template cast<double>();
    }
}

}  // namespace detail

template <class S>
std::vector<Rgb> render_rays(const RadianceField<S>& field, std::span<const Ray> rays,
                             std::span<const SampleSet> samples, const RenderConfig& cfg,
                             std::vector<CompositeResult>* details) {
    const auto g = detail::gather_samples<S>(rays, samples);
    typename RadianceField<S>::Output out;
    field.forward(g.positions, &g.directions, out);
    std::vector<Rgb> colors(rays.size());
    if (details) details->resize(rays.size());
    std::vector<double> sigmas;
    std::vector<Rgb> rgbs;
    for (std::size_t r = 0; r < rays.size(); ++r) {
        detail::unpack_ray<S>(out, g.offsets[r], samples[r].size(), sigmas, rgbs);
        CompositeResult c = composite(samples[r], sigmas, rgbs, cfg);
        colors[r] = c.rgb;
        if (details) (*details)[r] = std::move(c);
    }
    return colors;
}

template <class S>
double accumulate_squared_error_gradient(const RadianceField<S>& field, std::span<const Ray> rays,
                                         std::span<const SampleSet> samples, std::span<const Rgb> targets,
                                         const RenderConfig& cfg, double grad_scale, std::span<S> grad) {
    if (targets.size() != rays.size()) throw DomainError("render: targets and rays differ in count");
    const auto g = detail::gather_samples<S>(rays, samples);
    typename RadianceField<S>::Output out;
    typename RadianceField<S>::Cache cache;
    field.forward(g.positions, &g.directions, out, &cache);

    typename RadianceField<S>::RowVector d_sigma(out.sigma.cols());
    typename RadianceField<S>::Colors d_rgb(3, out.rgb.cols());
    double sse = 0.0;
    std::vector<double> sigmas;
    std::vector<Rgb> rgbs;
    for (std::size_t r = 0; r < rays.size(); ++r) {
        detail::unpack_ray<S>(out, g.offsets[r], samples[r].size(), sigmas, rgbs);
        const CompositeResult c = composite(samples[r], sigmas, rgbs, cfg);
        const Rgb err = c.rgb - targets[r];
        sse += err.squaredNorm();
        const CompositeGradient cg = composite_backward(samples[r], sigmas, rgbs, cfg, 2.0 * grad_scale * err);
        for (std::size_t i = 0; i < samples[r].size(); ++i) {
            const auto col = static_cast<Eigen::Index>(g.offsets[r] + i);
            d_sigma(col) = static_cast<S>(cg.d_sigma[i]);
            d_rgb.col(col) = cg.d_rgb[i].template cast<S>();
        }
    }
    if (d_sigma.cols() > 0) field.backward(cache, d_sigma, d_rgb, grad);
    return sse;
}

}  // namespace nss
