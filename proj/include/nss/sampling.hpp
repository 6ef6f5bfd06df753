#pragma once

#include "nss/rng.hpp"

#include <span>
#include <vector>

namespace nss {

/// Interval length assigned to the last sample so it can absorb all remaining light.
inline constexpr double kFarDelta = 1e10;

/// Ascending sample distances along one ray and their interval lengths
/// (delta_i = t_{i+1} - t_i, final delta = kFarDelta).
struct SampleSet {
    std::vector<double> positions;
    std::vector<double> deltas;

    static SampleSet from_positions(std::vector<double> positions);

    std::size_t size() const noexcept { return positions.size(); }
    bool empty() const noexcept { return positions.empty(); }
};

struct NearSurfaceConfig {
    /// Half of the sampling range around the surface, world units.
    double alpha = 0.125;
    int n_samples = 32;
    /// Lower bound on sample distances.
    double near_clip = 1e-3;
    /// One jitter shared by all bins of a ray instead of one per bin.
    bool shared_jitter = false;

    void validate() const;
};

struct FullRangeConfig {
    double t_near = 2.0;
    double t_far = 6.0;
    int n_samples = 32;
    /// Stretches the far end: the range becomes [t_near, t_near + (t_far - t_near) * range_scale].
    double range_scale = 1.0;

    void validate() const;
};

/// Stratified samples in [d - alpha, d + alpha] around surface depth `d`.
/// `jitter` holds one unit-interval value per bin (or a single value when
/// shared); bin n starts at S0 + (n - 1) * w with w = 2 alpha / N and
/// S0 = max(d - alpha, near_clip). If the near clip engages, the N bins evenly
/// cover [near_clip, d + alpha] instead. Throws DomainError when d <= 0.
SampleSet near_surface_samples(double d, const NearSurfaceConfig& cfg, std::span<const double> jitter);
SampleSet near_surface_samples(double d, const NearSurfaceConfig& cfg, Rng& rng);

/// One sample per equal-width bin of the (scaled) range; `jitter` in [0, 1) per bin.
SampleSet full_range_stratified(const FullRangeConfig& cfg, std::span<const double> jitter);
SampleSet full_range_stratified(const FullRangeConfig& cfg, Rng& rng);

/// Inverse-transform resampling of a piecewise-constant PDF over the coarse
/// bins. Bin i spans [t_i, t_{i+1}); the last bin reuses the preceding spacing.
/// `strata` are n_fine values in [0, 1) jittering the stratified uniforms
/// (u_j = (j + strata_j) / n_fine). All-zero weights fall back to a flat PDF.
/// Returns coarse and fine positions merged, sorted, and deduplicated at 1e-12.
SampleSet inverse_cdf_resample(const SampleSet& coarse, std::span<const double> weights, std::span<const double> strata);
SampleSet inverse_cdf_resample(const SampleSet& coarse, std::span<const double> weights, int n_fine, Rng& rng);

/// The fine draws alone, in stratum order.
std::vector<double> inverse_cdf_draws(const SampleSet& coarse, std::span<const double> weights,
                                      std::span<const double> strata);

}  // namespace nss
