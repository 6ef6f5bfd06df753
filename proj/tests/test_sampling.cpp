#include "nss/error.hpp"
#include "nss/rng.hpp"
#include "nss/sampling.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace nss;

namespace {

NearSurfaceConfig near(double alpha, int n, double clip = 1e-3) {
    NearSurfaceConfig c;
    c.alpha = alpha;
    c.n_samples = n;
    c.near_clip = clip;
    return c;
}

FullRangeConfig full(double t_near, double t_far, int n, double scale = 1.0) {
    FullRangeConfig c;
    c.t_near = t_near;
    c.t_far = t_far;
    c.n_samples = n;
    c.range_scale = scale;
    return c;
}

void expect_positions(const SampleSet& s, std::vector<double> expected) {
    ASSERT_EQ(s.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(s.positions[i], expected[i], 1e-12) << i;
}

bool strictly_ascending(const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<double>()) == v.end();
}

}  // namespace

TEST(NearSurface, ZeroJitter) {
    const std::vector<double> zeros(4, 0.0);
    expect_positions(near_surface_samples(1.0, near(1.0, 4, 0.0), zeros), {0.0, 0.5, 1.0, 1.5});
    expect_positions(near_surface_samples(2.0, near(0.5, 1), std::vector<double>{0.0}), {1.5});
}

TEST(NearSurface, StaysInBand) {
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
        const SampleSet s = near_surface_samples(3.0, near(0.125, 64), rng);
        EXPECT_GE(s.positions.front(), 2.875);
        EXPECT_LE(s.positions.back(), 3.125);
    }
}

TEST(NearSurface, DeltasAndFarCap) {
    const std::vector<double> half(4, 0.5);
    const SampleSet s = near_surface_samples(2.0, near(0.5, 4), half);
    expect_positions(s, {1.625, 1.875, 2.125, 2.375});
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.deltas[i], 0.25, 1e-12);
    EXPECT_EQ(s.deltas[3], kFarDelta);
}

TEST(NearSurface, SharedJitterShiftsAllBins) {
    NearSurfaceConfig c = near(0.5, 4);
    c.shared_jitter = true;
    Rng rng(5);
    const SampleSet s = near_surface_samples(2.0, c, rng);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(s.positions[i + 1] - s.positions[i], 0.25, 1e-12);
}

TEST(NearSurface, ClipCompressesBins) {
    const std::vector<double> zeros(4, 0.0);
    const SampleSet s = near_surface_samples(0.5, near(1.0, 4, 0.1), zeros);
    expect_positions(s, {0.1, 0.45, 0.8, 1.15});
    Rng rng(8);
    for (int k = 0; k < 100; ++k) {
        const SampleSet r = near_surface_samples(0.3, near(1.0, 16, 0.1), rng);
        EXPECT_GE(r.positions.front(), 0.1);
        EXPECT_LE(r.positions.back(), 1.3);
    }
}

TEST(NearSurface, RejectsBadInput) {
    Rng rng(1);
    EXPECT_THROW(near_surface_samples(0.0, near(0.1, 4), rng), DomainError);
    EXPECT_THROW(near_surface_samples(-1.0, near(0.1, 4), rng), DomainError);
    EXPECT_THROW(near(0.0, 4).validate(), ConfigError);
    EXPECT_THROW(near(0.1, 0).validate(), ConfigError);
    EXPECT_THROW(near(0.1, 4, -1).validate(), ConfigError);
}

TEST(NearSurface, RandomBoundsProperty) {
    Rng rng(21);
    for (int k = 0; k < 20000; ++k) {
        const double d = rng.uniform(0.01, 10.0);
        const double alpha = rng.uniform(0.001, 2.0);
        const int n = 1 + static_cast<int>(rng.below(64));
        const SampleSet s = near_surface_samples(d, near(alpha, n), rng);
        const double lo = std::max(d - alpha, 1e-3);
        for (double t : s.positions) {
            EXPECT_GE(t, lo);
            EXPECT_LE(t, d + alpha + 1e-12);
        }
    }
}

TEST(NearSurface, MeanSpacing) {
    Rng rng(22);
    const double alpha = 0.25;
    const int n = 16;
    double gaps = 0.0;
    std::size_t count = 0;
    for (int k = 0; k < 10000; ++k) {
        const SampleSet s = near_surface_samples(3.0, near(alpha, n), rng);
        for (int i = 0; i + 1 < n; ++i) gaps += s.positions[i + 1] - s.positions[i];
        count += n - 1;
    }
    EXPECT_NEAR(gaps / count, 2 * alpha / n, 0.05 * 2 * alpha / n);
}

TEST(NearSurface, NarrowerAlphaIsDenser) {
    const std::vector<double> jitter{0.1, 0.9, 0.3, 0.7, 0.5, 0.2, 0.8, 0.4};
    double previous = std::numeric_limits<double>::infinity();
    for (double alpha : {1.0, 0.5, 0.25, 0.125}) {
        const SampleSet s = near_surface_samples(3.0, near(alpha, 8), jitter);
        double worst = 0.0;
        for (double t : s.positions) worst = std::max(worst, std::abs(t - 3.0));
        EXPECT_LT(worst, previous);
        previous = worst;
    }
}

TEST(FullRange, Midpoints) {
    const std::vector<double> mid(4, 0.5);
    expect_positions(full_range_stratified(full(0, 4, 4), mid), {0.5, 1.5, 2.5, 3.5});
    expect_positions(full_range_stratified(full(0, 4, 4, 2.0), mid), {1, 3, 5, 7});
}

TEST(FullRange, OneSamplePerBin) {
    Rng rng(9);
    for (double scale : {1.0, 2.0, 8.0}) {
        const FullRangeConfig c = full(2, 6, 32, scale);
        const double w = 4.0 * scale / 32;
        for (int k = 0; k < 100; ++k) {
            const SampleSet s = full_range_stratified(c, rng);
            for (int i = 0; i < 32; ++i) {
                EXPECT_GE(s.positions[i], 2 + i * w);
                EXPECT_LT(s.positions[i], 2 + (i + 1) * w);
            }
            EXPECT_LE(s.positions.back(), 2 + 4 * scale);
        }
    }
}

TEST(FullRange, Validation) {
    EXPECT_THROW(full(3, 2, 4).validate(), ConfigError);
    EXPECT_THROW(full(-1, 2, 4).validate(), ConfigError);
    EXPECT_THROW(full(0, 2, 0).validate(), ConfigError);
    EXPECT_THROW(full(0, 2, 4, 0.5).validate(), ConfigError);
}

TEST(InverseCdf, UniformWeightsSpreadEvenly) {
    const SampleSet coarse = SampleSet::from_positions({0, 1, 2, 3});
    const std::vector<double> w(4, 1.0);
    Rng rng(2);
    std::vector<double> strata(40);
    for (double& u : strata) u = rng.uniform();
    const auto draws = inverse_cdf_draws(coarse, w, strata);
    std::vector<int> per_bin(4, 0);
    for (double t : draws) per_bin[std::min(3, static_cast<int>(std::floor(t)))]++;
    for (int c : per_bin) EXPECT_NEAR(c, 10, 1);
}

TEST(InverseCdf, DeltaWeightStaysInBin) {
    const SampleSet coarse = SampleSet::from_positions({0, 1, 2, 3});
    const std::vector<double> w{0, 0, 5, 0};
    Rng rng(4);
    const SampleSet s = inverse_cdf_resample(coarse, w, 64, rng);
    for (double t : s.positions) {
        const bool coarse_point = t == 0 || t == 1 || t == 2 || t == 3;
        if (!coarse_point) {
            EXPECT_GE(t, 2.0);
            EXPECT_LT(t, 3.0);
        }
    }
}

TEST(InverseCdf, TwoBinHistogram) {
    const SampleSet coarse = SampleSet::from_positions({0, 1});
    const std::vector<double> w{1, 3};
    Rng rng(6);
    std::vector<double> strata(4000);
    for (double& u : strata) u = rng.uniform();
    const auto draws = inverse_cdf_draws(coarse, w, strata);
    const auto in_second = std::count_if(draws.begin(), draws.end(), [](double t) { return t >= 1.0 && t < 2.0; });
    EXPECT_NEAR(static_cast<double>(in_second) / 4000.0, 0.75, 0.02);
}

TEST(InverseCdf, MergedSortedUnique) {
    const SampleSet coarse = SampleSet::from_positions({2, 2.5, 3, 3.5, 4});
    const std::vector<double> w{0.1, 0.5, 2, 0.2, 0.0};
    Rng rng(7);
    for (int k = 0; k < 200; ++k) {
        const SampleSet s = inverse_cdf_resample(coarse, w, 16, rng);
        EXPECT_TRUE(strictly_ascending(s.positions));
        EXPECT_LE(s.size(), 21u);
        EXPECT_GE(s.size(), 5u);
        EXPECT_EQ(s.deltas.back(), kFarDelta);
    }
    // a draw landing on a coarse sample is merged away
    const SampleSet dup = inverse_cdf_resample(coarse, std::vector<double>{1, 1, 1, 1, 1}, std::vector<double>{0.0});
    EXPECT_EQ(dup.size(), 5u);
}

TEST(InverseCdf, ZeroWeightsFallBackToFlat) {
    const SampleSet coarse = SampleSet::from_positions({0, 1, 2, 3});
    const auto draws = inverse_cdf_draws(coarse, std::vector<double>(4, 0.0), std::vector<double>(4, 0.5));
    ASSERT_EQ(draws.size(), 4u);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(draws[i], i + 0.5, 1e-12);
}

TEST(InverseCdf, LengthMismatchThrows) {
    const SampleSet coarse = SampleSet::from_positions({0, 1, 2});
    Rng rng(1);
    EXPECT_THROW(inverse_cdf_resample(coarse, std::vector<double>{1, 1}, 4, rng), DomainError);
}

TEST(Sampling, SeededStreamsReproduce) {
    Rng a = Rng::stream(42, 17), b = Rng::stream(42, 17), c = Rng::stream(42, 18);
    const SampleSet sa = near_surface_samples(2.0, near(0.2, 8), a);
    const SampleSet sb = near_surface_samples(2.0, near(0.2, 8), b);
    const SampleSet sc = near_surface_samples(2.0, near(0.2, 8), c);
    EXPECT_EQ(sa.positions, sb.positions);
    EXPECT_NE(sa.positions, sc.positions);
}
