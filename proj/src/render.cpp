#include "nss/render.hpp"

#include "nss/error.hpp"

#include <cmath>

namespace nss {

void RenderConfig::validate() const {
    if ((background_color.array() < 0.0).any() || (background_color.array() > 1.0).any())
        throw ConfigError("background_color: channels must lie in [0, 1]");
    if (!(sigma_scale > 0.0)) throw ConfigError("sigma_scale: must be positive");
}

namespace {

void check_inputs(const SampleSet& samples, std::span<const double> sigmas, std::span<const Rgb> rgbs) {
    if (sigmas.size() != samples.size() || rgbs.size() != samples.size() || samples.deltas.size() != samples.size())
        throw DomainError("composite: sample, density, and color counts differ");
    for (double s : sigmas)
        if (!(s >= 0.0)) throw DomainError("composite: densities must be non-negative");
}

}  // namespace

CompositeResult composite(const SampleSet& samples, std::span<const double> sigmas, std::span<const Rgb> rgbs,
                          const RenderConfig& cfg) {
    check_inputs(samples, sigmas, rgbs);
    CompositeResult out;
    out.weights.resize(samples.size());
    double optical_depth = 0.0;  // sum of sigma * delta before sample i
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double s = cfg.sigma_scale * sigmas[i] * samples.deltas[i];
        const double transmittance = std::exp(-optical_depth);
        const double alpha = -std::expm1(-s);
        const double w = transmittance * alpha;
        out.weights[i] = w;
        out.acc += w;
        out.rgb += w * rgbs[i];
        optical_depth += s;
    }
    out.residual = std::exp(-optical_depth);
    out.rgb += out.residual * cfg.background();
    return out;
}

CompositeGradient composite_backward(const SampleSet& samples, std::span<const double> sigmas,
                                     std::span<const Rgb> rgbs, const RenderConfig& cfg, const Rgb& d_pixel) {
    check_inputs(samples, sigmas, rgbs);
    const std::size_t n = samples.size();
    CompositeGradient g;
    g.d_sigma.assign(n, 0.0);
    g.d_rgb.assign(n, Rgb::Zero());
    std::vector<double> weights(n);
    std::vector<double> next_transmittance(n);  // T_{i+1}
    double optical_depth = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = cfg.sigma_scale * sigmas[i] * samples.deltas[i];
        const double t = std::exp(-optical_depth);
        weights[i] = t * -std::expm1(-s);
        optical_depth += s;
        next_transmittance[i] = std::exp(-optical_depth);
    }
    const double residual = std::exp(-optical_depth);
    // dC/ds_i = T_{i+1} c_i - sum_{k>i} w_k c_k - T_{N+1} bg
    Rgb behind = residual * cfg.background();
    for (std::size_t ii = n; ii-- > 0;) {
        const Rgb dc_ds = next_transmittance[ii] * rgbs[ii] - behind;
        g.d_sigma[ii] = d_pixel.dot(dc_ds) * cfg.sigma_scale * samples.deltas[ii];
        g.d_rgb[ii] = weights[ii] * d_pixel;
        behind += weights[ii] * rgbs[ii];
    }
    return g;
}

double psnr(const ColorImage& rendered, const ColorImage& gt, const Mask* background) {
    if (rendered.width() != gt.width() || rendered.height() != gt.height())
        throw DomainError("psnr: image sizes differ");
    if (background && (background->width() != gt.width() || background->height() != gt.height()))
        throw DomainError("psnr: mask size differs from the images");
    double sse = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (background && (*background)[i]) continue;
        sse += (rendered[i] - gt[i]).squaredNorm();
        count += 3;
    }
    if (count == 0) throw DomainError("psnr: no foreground pixels");
    const double mse = sse / static_cast<double>(count);
    if (mse == 0.0) return kPsnrIdentical;
    return 10.0 * std::log10(1.0 / mse);
}

}  // namespace nss
