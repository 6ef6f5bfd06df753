#pragma once

// Positional-encoded MLP radiance field with hand-written reverse mode.
// Templated on the scalar so training can run in float while gradient checks
// run in double.

#include "nss/error.hpp"
#include "nss/rng.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nss {

/// Heap buffer aligned to Eigen's widest packet.
template <class S>
using AlignedVector = std::vector<S, Eigen::aligned_allocator<S>>;

struct EncodingConfig {
    int l_pos = 10;
    int l_dir = 4;
    bool include_input = true;

    int dim(int frequencies) const { return 3 * ((include_input ? 1 : 0) + 2 * frequencies); }
    int pos_dim() const { return dim(l_pos); }
    int dir_dim() const { return dim(l_dir); }

    bool operator==(const EncodingConfig&) const = default;
};

/// Writes [x, sin(2^0 pi x), cos(2^0 pi x), ..., sin(2^(L-1) pi x), cos(2^(L-1) pi x)]
/// (x omitted without include_input) to `out`, which must hold dim(L) values.
/// Frequencies are generated by angle doubling in double precision.
template <class S>
void encode_into(const Eigen::Vector3d& x, int frequencies, bool include_input, S* out) {
    int k = 0;
    if (include_input)
        for (int a = 0; a < 3; ++a) out[k++] = static_cast<S>(x[a]);
    double s[3], c[3];
    for (int a = 0; a < 3; ++a) {
        s[a] = std::sin(std::numbers::pi * x[a]);
        c[a] = std::cos(std::numbers::pi * x[a]);
    }
    for (int l = 0; l < frequencies; ++l) {
        for (int a = 0; a < 3; ++a) out[k++] = static_cast<S>(s[a]);
        for (int a = 0; a < 3; ++a) out[k++] = static_cast<S>(c[a]);
        if (l % 4 == 3) {
            // re-anchor every few doublings to stop error growth
            for (int a = 0; a < 3; ++a) {
                const double angle = std::ldexp(std::numbers::pi * x[a], l + 1);
                s[a] = std::sin(angle);
                c[a] = std::cos(angle);
            }
        } else {
            for (int a = 0; a < 3; ++a) {
                const double s2 = 2.0 * s[a] * c[a];
                const double c2 = 1.0 - 2.0 * s[a] * s[a];
                s[a] = s2;
                c[a] = c2;
            }
        }
    }
}

inline std::vector<double> encode(const Eigen::Vector3d& x, int frequencies, bool include_input) {
    std::vector<double> out(static_cast<std::size_t>(3 * ((include_input ? 1 : 0) + 2 * frequencies)));
    encode_into(x, frequencies, include_input, out.data());
    return out;
}

/// Axis-aligned cube mapped onto [-1, 1]^3 before encoding.
struct SceneBounds {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double half_extent = 1.0;

    bool operator==(const SceneBounds&) const = default;
};

struct FieldConfig {
    EncodingConfig encoding;
    int width = 64;
    int hidden_layers = 4;
    /// 1-based hidden layer that also receives the encoded position; 0 disables.
    int skip_layer = 3;
    bool use_view_dirs = false;
    int dir_width = 32;
    SceneBounds bounds;

    void validate() const {
        if (encoding.l_pos < 0 || encoding.l_dir < 0) throw ConfigError("encoding: frequency counts must be >= 0");
        if (encoding.pos_dim() == 0) throw ConfigError("encoding: empty position features");
        if (width < 1 || hidden_layers < 1) throw ConfigError("field: width and hidden_layers must be >= 1");
        if (skip_layer != 0 && (skip_layer < 2 || skip_layer > hidden_layers))
            throw ConfigError("field: skip_layer must be 0 or in [2, hidden_layers]");
        if (use_view_dirs && dir_width < 1) throw ConfigError("field: dir_width must be >= 1");
        if (!(bounds.half_extent > 0.0)) throw ConfigError("field: bounds half_extent must be positive");
    }

    bool operator==(const FieldConfig&) const = default;
};

/// A dense layer inside the flat parameter vector: weight (out x in, column
/// major) at `offset`, then `out` biases.
struct DenseLayout {
    std::string name;
    int in = 0;
    int out = 0;
    std::size_t offset = 0;

    std::size_t weight_size() const { return static_cast<std::size_t>(in) * out; }
    std::size_t bias_offset() const { return offset + weight_size(); }
    std::size_t size() const { return weight_size() + out; }
};

/// Named contiguous slice of the parameter vector.
struct ParamBlock {
    std::string name;
    std::size_t offset;
    std::size_t size;
};

template <class S>
class RadianceField {
public:
    using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
    using RowVector = Eigen::Matrix<S, 1, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;
    using Colors = Eigen::Matrix<S, 3, Eigen::Dynamic>;

    struct Output {
        RowVector sigma;  // softplus density, >= 0
        Colors rgb;       // sigmoid color in [0, 1]
    };

    /// Activations kept for the backward pass.
    struct Cache {
        Matrix enc_pos;
        Matrix enc_dir;
        std::vector<Matrix> hidden;  // post-ReLU
        Matrix feature;
        Matrix view_hidden;
        RowVector sigma_raw;
        Colors rgb;
    };

    explicit RadianceField(FieldConfig config = {}) : config_(std::move(config)) {
        config_.validate();
        build_layout();
        params_.assign(num_params_, S(0));
    }

    const FieldConfig& config() const noexcept { return config_; }
    std::size_t num_params() const noexcept { return num_params_; }
    std::span<S> params() noexcept { return params_; }
    std::span<const S> params() const noexcept { return params_; }
    const std::vector<DenseLayout>& layers() const noexcept { return layers_; }

    std::vector<ParamBlock> param_blocks() const {
        std::vector<ParamBlock> blocks;
        for (const auto& l : layers_) {
            blocks.push_back({l.name + ".weight", l.offset, l.weight_size()});
            blocks.push_back({l.name + ".bias", l.bias_offset(), static_cast<std::size_t>(l.out)});
        }
        return blocks;
    }

    /// Glorot-uniform weights, zero biases.
    void initialize(std::uint64_t seed) {
        Rng rng(seed);
        std::fill(params_.begin(), params_.end(), S(0));
        for (const auto& l : layers_) {
            const double limit = std::sqrt(6.0 / (l.in + l.out));
            for (std::size_t i = 0; i < l.weight_size(); ++i)
                params_[l.offset + i] = static_cast<S>(rng.uniform(-limit, limit));
        }
    }

    /// Evaluates the field at world positions (3 x B). `dirs` (3 x B, unit) is
    /// ignored unless the config enables view directions.
    void forward(const Eigen::Matrix3Xd& positions, const Eigen::Matrix3Xd* dirs, Output& out,
                 Cache* cache = nullptr) const {
        const Eigen::Index batch = positions.cols();
        Cache local;
        Cache& c = cache ? *cache : local;
        encode_batch(positions, dirs, c);

        c.hidden.resize(static_cast<std::size_t>(config_.hidden_layers));
        for (int l = 0; l < config_.hidden_layers; ++l) {
            const DenseLayout& L = layers_[static_cast<std::size_t>(l)];
            Matrix& h = c.hidden[static_cast<std::size_t>(l)];
            if (l == 0) {
                h.noalias() = weight(L) * c.enc_pos;
            } else {
                const Matrix& prev = c.hidden[static_cast<std::size_t>(l - 1)];
                h.noalias() = weight(L).leftCols(config_.width) * prev;
                if (l + 1 == config_.skip_layer)
                    h.noalias() += weight(L).rightCols(c.enc_pos.rows()) * c.enc_pos;
            }
            h.colwise() += bias(L);
            h = h.cwiseMax(S(0));
        }
        const Matrix& top = c.hidden.back();

        const DenseLayout& Ls = layers_[sigma_layer_];
        c.sigma_raw.noalias() = weight(Ls) * top;
        c.sigma_raw.array() += bias(Ls)(0);

        Colors rgb_raw;
        const DenseLayout& Lc = layers_[rgb_layer_];
        if (config_.use_view_dirs) {
            const DenseLayout& Lf = layers_[feature_layer_];
            const DenseLayout& Lv = layers_[view_layer_];
            c.feature.noalias() = weight(Lf) * top;
            c.feature.colwise() += bias(Lf);
            c.view_hidden.noalias() = weight(Lv).leftCols(config_.width) * c.feature;
            c.view_hidden.noalias() += weight(Lv).rightCols(c.enc_dir.rows()) * c.enc_dir;
            c.view_hidden.colwise() += bias(Lv);
            c.view_hidden = c.view_hidden.cwiseMax(S(0));
            rgb_raw.noalias() = weight(Lc) * c.view_hidden;
        } else {
            rgb_raw.noalias() = weight(Lc) * top;
        }
        rgb_raw.colwise() += bias(Lc);

        out.sigma.resize(batch);
        out.rgb.resize(3, batch);
        for (Eigen::Index i = 0; i < batch; ++i) out.sigma(i) = softplus(c.sigma_raw(i));
        out.rgb = rgb_raw.unaryExpr([](S v) { return sigmoid(v); });
        c.rgb = out.rgb;
    }

    /// Accumulates d(loss)/d(params) into `grad` given upstream gradients on
    /// the outputs of the forward pass that filled `cache`.
    void backward(const Cache& c, const RowVector& d_sigma, const Colors& d_rgb, std::span<S> grad) const {
        if (grad.size() != num_params_) throw DomainError("backward: gradient buffer has the wrong size");
        const Eigen::Index batch = d_sigma.cols();

        RowVector d_sigma_raw(batch);
        for (Eigen::Index i = 0; i < batch; ++i) d_sigma_raw(i) = d_sigma(i) * sigmoid(c.sigma_raw(i));
        const Colors d_rgb_raw = (d_rgb.array() * c.rgb.array() * (S(1) - c.rgb.array())).matrix();

        const Matrix& top = c.hidden.back();
        Matrix d_top;

        const DenseLayout& Ls = layers_[sigma_layer_];
        grad_weight(Ls, grad).noalias() += d_sigma_raw * top.transpose();
        grad_bias(Ls, grad)(0) += d_sigma_raw.sum();
        d_top.noalias() = weight(Ls).transpose() * d_sigma_raw;

        const DenseLayout& Lc = layers_[rgb_layer_];
        grad_bias(Lc, grad) += d_rgb_raw.rowwise().sum();
        if (config_.use_view_dirs) {
            const DenseLayout& Lf = layers_[feature_layer_];
            const DenseLayout& Lv = layers_[view_layer_];
            grad_weight(Lc, grad).noalias() += d_rgb_raw * c.view_hidden.transpose();
            Matrix d_view = weight(Lc).transpose() * d_rgb_raw;
            d_view = d_view.cwiseProduct(relu_mask(c.view_hidden));
            grad_weight(Lv, grad).leftCols(config_.width).noalias() += d_view * c.feature.transpose();
            grad_weight(Lv, grad).rightCols(c.enc_dir.rows()).noalias() += d_view * c.enc_dir.transpose();
            grad_bias(Lv, grad) += d_view.rowwise().sum();
            Matrix d_feature = weight(Lv).leftCols(config_.width).transpose() * d_view;
            grad_weight(Lf, grad).noalias() += d_feature * top.transpose();
            grad_bias(Lf, grad) += d_feature.rowwise().sum();
            d_top.noalias() += weight(Lf).transpose() * d_feature;
        } else {
            grad_weight(Lc, grad).noalias() += d_rgb_raw * top.transpose();
            d_top.noalias() += weight(Lc).transpose() * d_rgb_raw;
        }

        Matrix d_h = std::move(d_top);
        for (int l = config_.hidden_layers - 1; l >= 0; --l) {
            const DenseLayout& L = layers_[static_cast<std::size_t>(l)];
            const Matrix& h = c.hidden[static_cast<std::size_t>(l)];
            Matrix d_z = d_h.cwiseProduct(relu_mask(h));
            grad_bias(L, grad) += d_z.rowwise().sum();
            if (l == 0) {
                grad_weight(L, grad).noalias() += d_z * c.enc_pos.transpose();
                break;
            }
            const Matrix& prev = c.hidden[static_cast<std::size_t>(l - 1)];
            grad_weight(L, grad).leftCols(config_.width).noalias() += d_z * prev.transpose();
            if (l + 1 == config_.skip_layer)
                grad_weight(L, grad).rightCols(c.enc_pos.rows()).noalias() += d_z * c.enc_pos.transpose();
            d_h.noalias() = weight(L).leftCols(config_.width).transpose() * d_z;
        }
    }

    static S softplus(S x) {
        // log(1 + e^x) without overflow
        return x > S(20) ? x : std::log1p(std::exp(x));
    }
    static S sigmoid(S x) {
        if (x >= S(0)) return S(1) / (S(1) + std::exp(-x));
        const S e = std::exp(x);
        return e / (S(1) + e);
    }

private:
    using ConstMatMap = Eigen::Map<const Matrix>;
    using MatMap = Eigen::Map<Matrix>;

    ConstMatMap weight(const DenseLayout& l) const { return ConstMatMap(params_.data() + l.offset, l.out, l.in); }
    Eigen::Map<const Vector> bias(const DenseLayout& l) const {
        return Eigen::Map<const Vector>(params_.data() + l.bias_offset(), l.out);
    }
    static MatMap grad_weight(const DenseLayout& l, std::span<S> g) { return MatMap(g.data() + l.offset, l.out, l.in); }
    static Eigen::Map<Vector> grad_bias(const DenseLayout& l, std::span<S> g) {
        return Eigen::Map<Vector>(g.data() + l.bias_offset(), l.out);
    }
    static Matrix relu_mask(const Matrix& activated) {
        return activated.unaryExpr([](S v) { return v > S(0) ? S(1) : S(0); });
    }

    void add_layer(const std::string& name, int in, int out) {
        DenseLayout l{name, in, out, num_params_};
        num_params_ += l.size();
        layers_.push_back(std::move(l));
    }

    void build_layout() {
        const int dp = config_.encoding.pos_dim();
        for (int l = 0; l < config_.hidden_layers; ++l) {
            int in = l == 0 ? dp : config_.width;
            if (l > 0 && l + 1 == config_.skip_layer) in += dp;
            add_layer("hidden" + std::to_string(l + 1), in, config_.width);
        }
        sigma_layer_ = layers_.size();
        add_layer("sigma", config_.width, 1);
        if (config_.use_view_dirs) {
            feature_layer_ = layers_.size();
            add_layer("feature", config_.width, config_.width);
            view_layer_ = layers_.size();
            add_layer("view", config_.width + config_.encoding.dir_dim(), config_.dir_width);
            rgb_layer_ = layers_.size();
            add_layer("rgb", config_.dir_width, 3);
        } else {
            rgb_layer_ = layers_.size();
            add_layer("rgb", config_.width, 3);
        }
    }

    void encode_batch(const Eigen::Matrix3Xd& positions, const Eigen::Matrix3Xd* dirs, Cache& c) const {
        const Eigen::Index batch = positions.cols();
        const auto& enc = config_.encoding;
        c.enc_pos.resize(enc.pos_dim(), batch);
        const double inv = 1.0 / config_.bounds.half_extent;
        for (Eigen::Index i = 0; i < batch; ++i) {
            const Eigen::Vector3d p = (positions.col(i) - config_.bounds.center) * inv;
            encode_into(p, enc.l_pos, enc.include_input, c.enc_pos.col(i).data());
        }
        if (config_.use_view_dirs) {
            if (!dirs || dirs->cols() != batch) throw DomainError("field: view directions required");
            c.enc_dir.resize(enc.dir_dim(), batch);
            for (Eigen::Index i = 0; i < batch; ++i)
                encode_into(Eigen::Vector3d(dirs->col(i)), enc.l_dir, enc.include_input, c.enc_dir.col(i).data());
        }
    }

    FieldConfig config_;
    std::vector<DenseLayout> layers_;
    std::size_t num_params_ = 0;
    std::size_t sigma_layer_ = 0;
    std::size_t rgb_layer_ = 0;
    std::size_t feature_layer_ = 0;
    std::size_t view_layer_ = 0;
    AlignedVector<S> params_;
};

struct FieldSample {
    double sigma;
    Eigen::Vector3d rgb;
};

/// Single-point evaluation.
template <class S>
FieldSample field_forward(const RadianceField<S>& field, const Eigen::Vector3d& pos,
                          const std::optional<Eigen::Vector3d>& dir = std::nullopt) {
    Eigen::Matrix3Xd p(3, 1);
    p.col(0) = pos;
    Eigen::Matrix3Xd d(3, 1);
    d.col(0) = dir.value_or(Eigen::Vector3d::UnitZ());
    typename RadianceField<S>::Output out;
    field.forward(p, &d, out);
    return {static_cast<double>(out.sigma(0)), out.rgb.col(0).template cast<double>()};
}

}  // namespace nss
