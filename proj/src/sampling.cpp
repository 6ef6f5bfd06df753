#include "nss/sampling.hpp"

#include "nss/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace nss {

SampleSet SampleSet::from_positions(std::vector<double> positions) {
    SampleSet s;
    s.positions = std::move(positions);
    s.deltas.resize(s.positions.size());
    for (std::size_t i = 0; i + 1 < s.positions.size(); ++i) s.deltas[i] = s.positions[i + 1] - s.positions[i];
    if (!s.deltas.empty()) s.deltas.back() = kFarDelta;
    return s;
}

void NearSurfaceConfig::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("alpha: must be positive");
    if (n_samples < 1) throw ConfigError("n_samples: must be >= 1");
    if (!(near_clip >= 0.0)) throw ConfigError("near_clip: must be >= 0");
}

void FullRangeConfig::validate() const {
    if (!(t_near >= 0.0 && t_near < t_far)) throw ConfigError("range: need 0 <= t_near < t_far");
    if (n_samples < 1) throw ConfigError("n_samples: must be >= 1");
    if (!(range_scale >= 1.0)) throw ConfigError("range_scale: must be >= 1");
}

SampleSet near_surface_samples(double d, const NearSurfaceConfig& cfg, std::span<const double> jitter) {
    if (!(d > 0.0)) throw DomainError("near_surface_samples: surface depth must be positive");
    const std::size_t n = static_cast<std::size_t>(cfg.n_samples);
    if (jitter.size() != n && !(cfg.shared_jitter && jitter.size() == 1))
        throw DomainError("near_surface_samples: expected " + std::to_string(n) + " jitter values");
    const double start = std::max(d - cfg.alpha, cfg.near_clip);
    const double bin = (d + cfg.alpha - start) / static_cast<double>(n);
    std::vector<double> positions(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = jitter.size() == 1 ? jitter[0] : jitter[i];
        positions[i] = start + static_cast<double>(i) * bin + u * bin;
    }
    return SampleSet::from_positions(std::move(positions));
}

SampleSet near_surface_samples(double d, const NearSurfaceConfig& cfg, Rng& rng) {
    std::vector<double> jitter(cfg.shared_jitter ? 1 : static_cast<std::size_t>(cfg.n_samples));
    for (double& u : jitter) u = rng.uniform();
    return near_surface_samples(d, cfg, jitter);
}

SampleSet full_range_stratified(const FullRangeConfig& cfg, std::span<const double> jitter) {
    const std::size_t n = static_cast<std::size_t>(cfg.n_samples);
    if (jitter.size() != n) throw DomainError("full_range_stratified: expected " + std::to_string(n) + " jitter values");
    const double bin = (cfg.t_far - cfg.t_near) * cfg.range_scale / static_cast<double>(n);
    std::vector<double> positions(n);
    for (std::size_t i = 0; i < n; ++i) positions[i] = cfg.t_near + (static_cast<double>(i) + jitter[i]) * bin;
    return SampleSet::from_positions(std::move(positions));
}

SampleSet full_range_stratified(const FullRangeConfig& cfg, Rng& rng) {
    std::vector<double> jitter(static_cast<std::size_t>(cfg.n_samples));
    for (double& u : jitter) u = rng.uniform();
    return full_range_stratified(cfg, jitter);
}

std::vector<double> inverse_cdf_draws(const SampleSet& coarse, std::span<const double> weights,
                                      std::span<const double> strata) {
    const std::size_t nb = coarse.positions.size();
    if (weights.size() != nb)
        throw DomainError("inverse_cdf_resample: " + std::to_string(weights.size()) + " weights for " +
                          std::to_string(nb) + " coarse samples");
    if (nb == 0) return {};
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("inverse_cdf_resample: weights must be finite and >= 0");

    std::vector<double> edges(nb + 1);
    for (std::size_t i = 0; i < nb; ++i) edges[i] = coarse.positions[i];
    const double last_width = nb > 1 ? coarse.positions[nb - 1] - coarse.positions[nb - 2] : 0.0;
    edges[nb] = coarse.positions[nb - 1] + last_width;

    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<double> cdf(nb + 1, 0.0);
    for (std::size_t i = 0; i < nb; ++i)
        cdf[i + 1] = cdf[i] + (total > 0.0 ? weights[i] / total : 1.0 / static_cast<double>(nb));
    cdf[nb] = 1.0;

    const std::size_t n_fine = strata.size();
    std::vector<double> out(n_fine);
    for (std::size_t j = 0; j < n_fine; ++j) {
        const double u = (static_cast<double>(j) + strata[j]) / static_cast<double>(n_fine);
        // first cdf entry strictly above u; zero-mass bins are skipped
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t k = static_cast<std::size_t>(std::distance(cdf.begin(), it));
        k = std::clamp<std::size_t>(k, 1, nb) - 1;
        const double mass = cdf[k + 1] - cdf[k];
        const double frac = mass > 0.0 ? std::clamp((u - cdf[k]) / mass, 0.0, 1.0) : 0.0;
        out[j] = edges[k] + frac * (edges[k + 1] - edges[k]);
    }
    return out;
}

SampleSet inverse_cdf_resample(const SampleSet& coarse, std::span<const double> weights,
                               std::span<const double> strata) {
    std::vector<double> merged = inverse_cdf_draws(coarse, weights, strata);
    merged.insert(merged.end(), coarse.positions.begin(), coarse.positions.end());
    std::sort(merged.begin(), merged.end());
    const auto last = std::unique(merged.begin(), merged.end(), [](double a, double b) { return b - a <= 1e-12; });
    merged.erase(last, merged.end());
    return SampleSet::from_positions(std::move(merged));
}

SampleSet inverse_cdf_resample(const SampleSet& coarse, std::span<const double> weights, int n_fine, Rng& rng) {
    if (n_fine < 0) throw DomainError("inverse_cdf_resample: n_fine must be >= 0");
    std::vector<double> strata(static_cast<std::size_t>(n_fine));
    for (double& u : strata) u = rng.uniform();
    return inverse_cdf_resample(coarse, weights, strata);
}

}  // namespace nss
