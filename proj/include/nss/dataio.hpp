#pragma once

#include "nss/geom.hpp"
#include "nss/image.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nss {

struct Frame {
    Pose pose;
    ColorImage color;
    /// Absent when the dataset ships without depth maps.
    std::optional<DepthImage> depth;
    /// Background flags (true where ground-truth depth is 0); empty without depth.
    Mask background;

    bool has_depth() const { return depth.has_value(); }
};

struct Dataset {
    CameraIntrinsics intrinsics;
    /// World units per 16-bit depth step on disk.
    double depth_scale = 1e-4;
    std::vector<Frame> frames;

    bool has_depth() const;
    /// Throws DataError when frames disagree with the intrinsics or a mask does
    /// not match its depth map.
    void validate() const;

    /// Every `stride`-th frame starting at frame 0, in trajectory order.
    Dataset subset(int stride) const;
};

// --- depth quantization -----------------------------------------------------

/// round(value / scale) with 0 reserved for hole/background; positive depths
/// never quantize to 0. Throws DataError if the value exceeds the 16-bit range.
std::uint16_t quantize_depth(double value, double scale);
inline double dequantize_depth(std::uint16_t q, double scale) { return q * scale; }

// --- PNG --------------------------------------------------------------------

/// 8-bit RGB PNG. Colors are clamped to [0, 1] and rounded to the nearest level.
void write_color_png(const ColorImage& image, const std::filesystem::path& path);
ColorImage read_color_png(const std::filesystem::path& path);

/// 16-bit grayscale PNG of raw quantized values.
void write_depth_png(const Image<std::uint16_t>& image, const std::filesystem::path& path);
Image<std::uint16_t> read_depth_png(const std::filesystem::path& path);

void write_depth_png(const DepthImage& depth, double scale, const std::filesystem::path& path);
DepthImage read_depth_png(const std::filesystem::path& path, double scale);

/// Quantize color to 8 bits and back, matching a PNG round trip.
ColorImage quantize_color(const ColorImage& image);

// --- dataset directory --------------------------------------------------------

/// Reads `dir/manifest.json` and every referenced image.
Dataset load_dataset(const std::filesystem::path& dir);
/// Writes `manifest.json`, `color/NNNN.png`, and (when present) `depth/NNNN.png`.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace nss
