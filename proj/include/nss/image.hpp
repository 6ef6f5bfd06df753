#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nss {

/// Row-major 2D grid addressed as (x = column, y = row).
template <class T>
class Image {
public:
    using value_type = T;

    Image() = default;
    Image(int width, int height, const T& fill = T{})
        : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int x, int y) { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const { return data_[index(x, y)]; }
    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width_ + x; }

    std::span<T> pixels() noexcept { return data_; }
    std::span<const T> pixels() const noexcept { return data_; }

    bool operator==(const Image&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using Rgb = Eigen::Vector3d;

/// Ray distances in world units; 0 encodes hole or background.
using DepthImage = Image<double>;
/// Linear RGB in [0, 1].
using ColorImage = Image<Rgb>;
/// Nonzero marks background.
using Mask = Image<std::uint8_t>;

inline Mask background_mask(const DepthImage& depth) {
    Mask mask(depth.width(), depth.height(), 0);
    for (std::size_t i = 0; i < depth.size(); ++i) mask[i] = depth[i] == 0.0 ? 1 : 0;
    return mask;
}

inline std::size_t count_zero(const DepthImage& depth) {
    std::size_t n = 0;
    for (double v : depth.pixels()) n += v == 0.0;
    return n;
}

}  // namespace nss
