#include "nss/depthmap.hpp"
#include "nss/error.hpp"
#include "nss/rng.hpp"

#include "scenes.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nss;

namespace {

ProjectedDepth from_image(const DepthImage& d) {
    ProjectedDepth pd{d, Image<Provenance>(d.width(), d.height(), Provenance::empty)};
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] > 0.0) pd.provenance[i] = Provenance::from_cloud;
    return pd;
}

HoleFillConfig config(double kappa, int window, HoleStatistics stats = HoleStatistics::whole_window) {
    HoleFillConfig c;
    c.kappa = kappa;
    c.window = window;
    c.statistics = stats;
    return c;
}

/// Brute-force (mu - 0) / sigma over the window, either over all pixels or nonzero ones only.
double brute_ratio(const DepthImage& d, int cx, int cy, int m, bool nonzero_only) {
    std::vector<double> v;
    for (int y = cy - m / 2; y <= cy + m / 2; ++y)
        for (int x = cx - m / 2; x <= cx + m / 2; ++x)
            if (x >= 0 && y >= 0 && x < d.width() && y < d.height() && (!nonzero_only || d(x, y) > 0))
                v.push_back(d(x, y));
    double mu = 0;
    for (double a : v) mu += a;
    mu /= v.size();
    double var = 0;
    for (double a : v) var += (a - mu) * (a - mu);
    return mu / std::sqrt(var / v.size());
}

const HoleStatistics kModes[] = {HoleStatistics::whole_window, HoleStatistics::nonzero_only};

}  // namespace

TEST(ProjectDepth, EmptyCloud) {
    const CameraIntrinsics intr{4, 4, 2, 2, 4, 4};
    const ProjectedDepth pd = project_cloud_depth(PointCloud{}, intr, Pose{});
    EXPECT_EQ(pd.count(Provenance::empty), 16u);
    EXPECT_EQ(count_zero(pd.depth), 16u);
}

TEST(ProjectDepth, ClosestPointWins) {
    const CameraIntrinsics intr{1, 1, 0.5, 0.5, 1, 1};
    PointCloud cloud;
    cloud.points.push_back({Eigen::Vector3d(0, 0, 3), Rgb::Zero()});
    cloud.points.push_back({Eigen::Vector3d(0, 0, 2), Rgb::Zero()});
    const ProjectedDepth pd = project_cloud_depth(cloud, intr, Pose{});
    EXPECT_EQ(pd.depth(0, 0), 2.0);
    EXPECT_EQ(pd.provenance(0, 0), Provenance::from_cloud);
}

TEST(ProjectDepth, SourceFrameRoundTrip) {
    const Dataset ds = nss::testing::sphere_ring(1, 48);
    const Frame& f = ds.frames[0];
    const PointCloud cloud = cloud_from_depth(ds.intrinsics, f.pose, *f.depth, f.color);
    const ProjectedDepth pd = project_cloud_depth(cloud, ds.intrinsics, f.pose);
    for (std::size_t i = 0; i < pd.depth.size(); ++i) {
        if (pd.provenance[i] != Provenance::from_cloud) continue;
        EXPECT_NEAR(pd.depth[i], (*f.depth)[i], 1e-5);
    }
    EXPECT_EQ(pd.count(Provenance::from_cloud), f.depth->size() - count_zero(*f.depth));
}

TEST(Holes, EmptyWindowIsBackground) {
    const ProjectedDepth pd = from_image(DepthImage(15, 15, 0.0));
    for (auto mode : kModes) EXPECT_FALSE(classify_hole(pd, 7, 7, config(2, 11, mode)));
}

TEST(Holes, DenseJitteredWindowIsSurface) {
    Rng rng(1);
    DepthImage d(11, 11, 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = 3.0 + rng.uniform(-1e-3, 1e-3);
    d(5, 5) = 0.0;
    const ProjectedDepth pd = from_image(d);
    EXPECT_GT(brute_ratio(d, 5, 5, 11, true), 2.0);
    EXPECT_GT(brute_ratio(d, 5, 5, 11, false), 2.0);
    for (auto mode : kModes) EXPECT_TRUE(classify_hole(pd, 5, 5, config(2, 11, mode)));
}

TEST(Holes, SparseWindowLacksSupport) {
    DepthImage d(11, 11, 0.0);
    for (int i = 0; i < 10; ++i) d(i, 0) = 3.0 + 0.01 * i;
    const ProjectedDepth pd = from_image(d);
    for (auto mode : kModes) EXPECT_FALSE(classify_hole(pd, 5, 5, config(2, 11, mode)));
}

TEST(Holes, NonHoleNeverClassified) {
    const ProjectedDepth pd = from_image(DepthImage(5, 5, 1.0));
    EXPECT_FALSE(classify_hole(pd, 2, 2, config(2, 3)));
}

TEST(Holes, MatchesBruteForceRatio) {
    Rng rng(4);
    for (int trial = 0; trial < 300; ++trial) {
        DepthImage d(9, 9, 0.0);
        const double density = rng.uniform(0.2, 1.0);
        for (std::size_t i = 0; i < d.size(); ++i)
            if (rng.uniform() < density) d[i] = rng.uniform(1.0, 1.5);
        const int x = static_cast<int>(rng.below(9)), y = static_cast<int>(rng.below(9));
        d(x, y) = 0.0;
        const ProjectedDepth pd = from_image(d);
        for (auto mode : kModes) {
            const bool nz = mode == HoleStatistics::nonzero_only;
            const WindowStats s = window_stats(d, x, y, config(2, 5, mode));
            const bool expected = s.nonzero >= (s.area + 3) / 4 && brute_ratio(d, x, y, 5, nz) > 2.0;
            EXPECT_EQ(classify_hole(pd, x, y, config(2, 5, mode)), expected);
        }
    }
}

TEST(Holes, ConstantNeighborhoodFilledExactly) {
    DepthImage d(3, 3, 3.0);
    d(1, 1) = 0.0;
    for (auto mode : kModes) {
        const ProjectedDepth out = fill_holes(from_image(d), config(2, 3, mode));
        EXPECT_EQ(out.depth(1, 1), 3.0);
        EXPECT_EQ(out.provenance(1, 1), Provenance::filled);
    }
}

TEST(Holes, NoHolesIsFixedPoint) {
    Rng rng(2);
    DepthImage d(8, 8);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = rng.uniform(1, 2);
    const ProjectedDepth pd = from_image(d);
    const ProjectedDepth out = fill_holes(pd, config(2, 11));
    EXPECT_EQ(out.depth, pd.depth);
    EXPECT_EQ(out.provenance, pd.provenance);
}

TEST(Holes, SinglePassNoCascade) {
    // a 3-pixel gap in a row: the middle pixel sees too many zeros before any fill
    DepthImage d(3, 3, 2.0);
    d(0, 1) = d(1, 1) = d(2, 1) = 0.0;
    const ProjectedDepth out = fill_holes(from_image(d), config(1, 3, HoleStatistics::nonzero_only));
    const ProjectedDepth twice = fill_holes(out, config(1, 3, HoleStatistics::nonzero_only));
    EXPECT_EQ(out.depth(1, 1), 2.0);
    EXPECT_EQ(twice.depth, out.depth);
}

TEST(Holes, ConfigValidation) {
    EXPECT_THROW(config(0, 11).validate(), ConfigError);
    EXPECT_THROW(config(2, 4).validate(), ConfigError);
    EXPECT_THROW(config(2, 1).validate(), ConfigError);
    EXPECT_NO_THROW(config(2, 3).validate());
}

class SyntheticHoles : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        // cloud from a sparse ring, projected into an interleaved view
        const Dataset ring = nss::testing::sphere_ring(12, 64);
        Dataset sub;
        sub.intrinsics = ring.intrinsics;
        for (std::size_t i = 0; i < ring.frames.size(); i += 2) sub.frames.push_back(ring.frames[i]);
        cloud_ = new PointCloud(generate_refined_cloud(sub, {0.1, 1}));
        view_ = new Frame(ring.frames[1]);
        intr_ = ring.intrinsics;
    }
    static void TearDownTestSuite() {
        delete cloud_;
        delete view_;
    }
    static PointCloud* cloud_;
    static Frame* view_;
    static CameraIntrinsics intr_;
};

PointCloud* SyntheticHoles::cloud_ = nullptr;
Frame* SyntheticHoles::view_ = nullptr;
CameraIntrinsics SyntheticHoles::intr_;

TEST_F(SyntheticHoles, FillingImprovesSilhouetteCoverage) {
    const ProjectedDepth raw = project_cloud_depth(*cloud_, intr_, view_->pose);
    const ProjectedDepth filled = fill_holes(raw, config(2, 11));
    std::size_t zero_in_before = 0, zero_in_after = 0, accurate = 0;
    for (std::size_t i = 0; i < raw.depth.size(); ++i) {
        const double gt = (*view_->depth)[i];
        if (raw.provenance[i] == Provenance::from_cloud) {
            EXPECT_EQ(filled.depth[i], raw.depth[i]);
        }
        if (gt <= 0.0) continue;
        zero_in_before += raw.depth[i] == 0.0;
        zero_in_after += filled.depth[i] == 0.0;
        if (filled.provenance[i] == Provenance::filled && std::abs(filled.depth[i] - gt) <= 0.3) ++accurate;
    }
    ASSERT_GT(zero_in_before, 0u);
    EXPECT_LT(zero_in_after, zero_in_before);
    EXPECT_GE(static_cast<double>(accurate), 0.9 * static_cast<double>(filled.count(Provenance::filled)));
}

TEST_F(SyntheticHoles, SecondPassChangesLittle) {
    const ProjectedDepth once = fill_holes(project_cloud_depth(*cloud_, intr_, view_->pose), config(2, 11));
    const ProjectedDepth twice = fill_holes(once, config(2, 11));
    std::size_t changed = 0;
    for (std::size_t i = 0; i < once.depth.size(); ++i) changed += once.depth[i] != twice.depth[i];
    EXPECT_LT(static_cast<double>(changed), 0.01 * static_cast<double>(once.depth.size()));
}

TEST_F(SyntheticHoles, SmallerKappaFillsMore) {
    const ProjectedDepth raw = project_cloud_depth(*cloud_, intr_, view_->pose);
    for (auto mode : kModes) {
        std::size_t previous = 0;
        for (double kappa : {8.0, 4.0, 2.0, 1.0, 0.5}) {
            const std::size_t n = fill_holes(raw, config(kappa, 11, mode)).count(Provenance::filled);
            EXPECT_GE(n, previous) << kappa;
            previous = n;
        }
    }
}

TEST_F(SyntheticHoles, DenserCloudNeverLeavesMoreSilhouetteHoles) {
    const Dataset ring = nss::testing::sphere_ring(12, 64);
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (std::size_t frames : {2u, 4u, 8u, 12u}) {
        Dataset sub;
        sub.intrinsics = ring.intrinsics;
        for (std::size_t i = 0; i < frames; ++i) sub.frames.push_back(ring.frames[(i * 12) / frames]);
        const PointCloud cloud = generate_refined_cloud(sub, {0.1, 1});
        const ProjectedDepth pd = project_cloud_depth(cloud, intr_, view_->pose);
        std::size_t holes = 0;
        for (std::size_t i = 0; i < pd.depth.size(); ++i) holes += (*view_->depth)[i] > 0 && pd.depth[i] == 0;
        EXPECT_LE(holes, previous) << frames;
        previous = holes;
    }
}
