#include "nss/adam.hpp"
#include "nss/error.hpp"
#include "nss/field.hpp"
#include "nss/rng.hpp"

#include "gradcheck.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nss;
using nss::testing::central_difference;
using nss::testing::gradient_close;

namespace {

Eigen::Matrix3Xd random_points(Rng& rng, int n, double extent = 1.0) {
    Eigen::Matrix3Xd p(3, n);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < 3; ++a) p(a, i) = rng.uniform(-extent, extent);
    return p;
}

Eigen::Matrix3Xd random_dirs(Rng& rng, int n) {
    Eigen::Matrix3Xd d(3, n);
    for (int i = 0; i < n; ++i) d.col(i) = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    return d;
}

FieldConfig small_config(bool view_dirs) {
    FieldConfig c;
    c.encoding.l_pos = 3;
    c.encoding.l_dir = 2;
    c.width = 16;
    c.hidden_layers = 4;
    c.skip_layer = 3;
    c.use_view_dirs = view_dirs;
    c.dir_width = 8;
    c.bounds.center = Eigen::Vector3d(0.1, -0.2, 0.3);
    c.bounds.half_extent = 1.5;
    return c;
}

/// Checks d/dparams of sum(a * sigma + b . rgb) against central differences on
/// `probes_per_block` random entries of every parameter block.
void check_field_gradient(const FieldConfig& cfg, std::uint64_t seed, int probes_per_block) {
    RadianceField<double> field(cfg);
    field.initialize(seed);
    Rng rng(seed + 1);
    // small nonzero biases so every block carries signal
    for (auto& p : field.params()) p += rng.uniform(-0.05, 0.05);
    const int batch = 6;
    const Eigen::Matrix3Xd pos = random_points(rng, batch);
    const Eigen::Matrix3Xd dirs = random_dirs(rng, batch);
    RadianceField<double>::RowVector a(batch);
    RadianceField<double>::Colors b(3, batch);
    for (int i = 0; i < batch; ++i) {
        a(i) = rng.uniform(-1, 1);
        for (int k = 0; k < 3; ++k) b(k, i) = rng.uniform(-1, 1);
    }
    const auto loss = [&] {
        RadianceField<double>::Output out;
        field.forward(pos, &dirs, out);
        return (a.array() * out.sigma.array()).sum() + (b.array() * out.rgb.array()).sum();
    };
    RadianceField<double>::Output out;
    RadianceField<double>::Cache cache;
    field.forward(pos, &dirs, out, &cache);
    std::vector<double> grad(field.num_params(), 0.0);
    field.backward(cache, a, b, grad);

    int probes = 0;
    for (const ParamBlock& block : field.param_blocks()) {
        for (int k = 0; k < probes_per_block; ++k) {
            const std::size_t i = block.offset + static_cast<std::size_t>(rng.below(block.size));
            const double numeric = central_difference(field.params(), i, 1e-4, loss);
            EXPECT_TRUE(gradient_close(grad[i], numeric))
                << block.name << " index " << i << ": analytic " << grad[i] << " numeric " << numeric;
            ++probes;
        }
    }
    EXPECT_GE(probes, 100);
}

}  // namespace

TEST(Encoding, ZeroInput) {
    const auto e = encode(Eigen::Vector3d::Zero(), 2, true);
    ASSERT_EQ(e.size(), 15u);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(e[i], 0.0);
    for (int l = 0; l < 2; ++l) {
        for (int a = 0; a < 3; ++a) {
            EXPECT_EQ(e[3 + 6 * l + a], 0.0);
            EXPECT_EQ(e[3 + 6 * l + 3 + a], 1.0);
        }
    }
}

TEST(Encoding, Dimension) {
    EXPECT_EQ(encode(Eigen::Vector3d::Ones(), 10, true).size(), 63u);
    EncodingConfig c;
    EXPECT_EQ(c.pos_dim(), 63);
    EXPECT_EQ(c.dir_dim(), 27);
    c.include_input = false;
    EXPECT_EQ(c.dim(10), 60);
}

TEST(Encoding, MatchesDirectEvaluation) {
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
        const Eigen::Vector3d x(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        const auto e = encode(x, 10, false);
        for (int l = 0; l < 10; ++l) {
            for (int a = 0; a < 3; ++a) {
                const double angle = std::ldexp(M_PI, l) * x[a];
                EXPECT_NEAR(e[6 * l + a], std::sin(angle), 1e-9);
                EXPECT_NEAR(e[6 * l + 3 + a], std::cos(angle), 1e-9);
            }
        }
    }
}

TEST(Encoding, DistinguishesNearbyPoints) {
    const auto a = encode(Eigen::Vector3d(0.2, 0.3, -0.4), 1, true);
    const auto b = encode(Eigen::Vector3d(0.201, 0.3, -0.4), 1, true);
    EXPECT_NE(a, b);
}

TEST(Field, ZeroParamsGiveNeutralOutput) {
    RadianceField<double> field(FieldConfig{});
    const FieldSample s = field_forward(field, Eigen::Vector3d(0.3, -0.1, 0.7));
    EXPECT_NEAR(s.sigma, std::log(2.0), 1e-12);
    EXPECT_NEAR((s.rgb - Eigen::Vector3d::Constant(0.5)).norm(), 0.0, 1e-12);
}

TEST(Field, Reproducible) {
    RadianceField<float> a(FieldConfig{}), b(FieldConfig{});
    a.initialize(99);
    b.initialize(99);
    const FieldSample sa = field_forward(a, Eigen::Vector3d(0.1, 0.2, 0.3));
    const FieldSample sb = field_forward(b, Eigen::Vector3d(0.1, 0.2, 0.3));
    EXPECT_EQ(sa.sigma, sb.sigma);
    EXPECT_EQ(sa.rgb, sb.rgb);
    RadianceField<float> c(FieldConfig{});
    c.initialize(100);
    EXPECT_NE(field_forward(c, Eigen::Vector3d(0.1, 0.2, 0.3)).sigma, sa.sigma);
}

TEST(Field, LayoutAndInit) {
    FieldConfig cfg;
    RadianceField<float> field(cfg);
    // 63->64, 64->64, (64+63)->64, 64->64, 64->1, 64->3
    const std::size_t expected = (63 * 64 + 64) + (64 * 64 + 64) + (127 * 64 + 64) + (64 * 64 + 64) + (64 + 1) +
                                 (64 * 3 + 3);
    EXPECT_EQ(field.num_params(), expected);
    field.initialize(1);
    for (const auto& l : field.layers()) {
        const double limit = std::sqrt(6.0 / (l.in + l.out));
        for (std::size_t i = 0; i < l.weight_size(); ++i) EXPECT_LE(std::abs(field.params()[l.offset + i]), limit);
        for (int i = 0; i < l.out; ++i) EXPECT_EQ(field.params()[l.bias_offset() + i], 0.0f);
    }
    EXPECT_EQ(field.param_blocks().front().name, "hidden1.weight");
}

TEST(Field, OutputRanges) {
    Rng rng(4);
    RadianceField<float> field(FieldConfig{});
    field.initialize(4);
    for (auto& p : field.params()) p *= 20.0f;
    const Eigen::Matrix3Xd pos = random_points(rng, 500, 3.0);
    RadianceField<float>::Output out;
    field.forward(pos, nullptr, out);
    EXPECT_TRUE((out.sigma.array() >= 0.0f).all());
    EXPECT_TRUE((out.rgb.array() >= 0.0f).all() && (out.rgb.array() <= 1.0f).all());
    EXPECT_TRUE(out.sigma.allFinite());
}

TEST(Field, ConfigValidation) {
    FieldConfig c;
    c.skip_layer = 1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = FieldConfig{};
    c.width = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = FieldConfig{};
    c.bounds.half_extent = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = FieldConfig{};
    c.skip_layer = 0;
    EXPECT_NO_THROW(c.validate());
}

TEST(FieldGradient, PositionOnly) { check_field_gradient(small_config(false), 10, 10); }

TEST(FieldGradient, WithViewDirections) { check_field_gradient(small_config(true), 20, 8); }

TEST(FieldGradient, DefaultArchitecture) {
    FieldConfig cfg;
    cfg.use_view_dirs = true;
    check_field_gradient(cfg, 30, 9);
}

TEST(FieldGradient, FloatMatchesDouble) {
    FieldConfig cfg = small_config(false);
    RadianceField<double> d(cfg);
    RadianceField<float> f(cfg);
    d.initialize(5);
    f.initialize(5);
    Rng rng(6);
    const Eigen::Matrix3Xd pos = random_points(rng, 8);
    RadianceField<double>::Output od;
    RadianceField<double>::Cache cd;
    RadianceField<float>::Output of;
    RadianceField<float>::Cache cf;
    d.forward(pos, nullptr, od, &cd);
    f.forward(pos, nullptr, of, &cf);
    std::vector<double> gd(d.num_params());
    std::vector<float> gf(f.num_params());
    d.backward(cd, RadianceField<double>::RowVector::Ones(8), RadianceField<double>::Colors::Ones(3, 8), gd);
    f.backward(cf, RadianceField<float>::RowVector::Ones(8), RadianceField<float>::Colors::Ones(3, 8), gf);
    for (std::size_t i = 0; i < gd.size(); ++i) EXPECT_NEAR(gf[i], gd[i], 1e-4 + 1e-3 * std::abs(gd[i]));
}

TEST(Adam, FirstStepMovesByLr) {
    AdamState<double> state(1, LrSchedule{0.01, 100, 0.001});
    std::vector<double> w{1.0};
    adam_step(state, std::span<double>(w), std::span<const double>(std::vector<double>{1.0}));
    EXPECT_NEAR(w[0], 1.0 - 0.01, 1e-8);
    EXPECT_EQ(state.step, 1);
}

TEST(Adam, ZeroGradientKeepsParams) {
    AdamState<double> state(3);
    std::vector<double> w{1, 2, 3};
    adam_step(state, std::span<double>(w), std::span<const double>(std::vector<double>(3, 0.0)));
    EXPECT_EQ(w, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(state.step, 1);
}

TEST(Adam, MinimizesQuadratic) {
    AdamState<double> state(1, LrSchedule{0.1, 1000000, 0.01});
    std::vector<double> w{0.0};
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> g{2.0 * (w[0] - 3.0)};
        adam_step(state, std::span<double>(w), std::span<const double>(g));
    }
    EXPECT_LT(std::abs(w[0] - 3.0), 0.05);
}

TEST(Adam, ScheduleDrops) {
    const LrSchedule s{5e-4, 10, 5e-5};
    EXPECT_EQ(s.at(0), 5e-4);
    EXPECT_EQ(s.at(9), 5e-4);
    EXPECT_EQ(s.at(10), 5e-5);
}

TEST(Adam, NonFiniteGradientNamesBlock) {
    RadianceField<float> field(small_config(false));
    AdamState<float> state(field.num_params());
    std::vector<float> g(field.num_params(), 0.0f);
    const auto blocks = field.param_blocks();
    g[blocks[3].offset] = std::numeric_limits<float>::quiet_NaN();
    try {
        adam_step(state, field.params(), std::span<const float>(g), blocks);
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find(blocks[3].name), std::string::npos) << e.what();
    }
    EXPECT_EQ(state.step, 0);
}
