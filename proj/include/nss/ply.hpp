#pragma once

#include "nss/pointcloud.hpp"

#include <filesystem>
#include <string>

namespace nss {

/// Binary little-endian PLY: one `vertex` element with float32 x, y, z and
/// uint8 red, green, blue. Colors are clamped to [0, 1] and rounded to 8 bits.
std::string encode_ply(const PointCloud& cloud);

/// Accepts binary_little_endian PLY whose vertex element carries x, y, z and
/// optionally red, green, blue of any scalar PLY type. Other vertex properties
/// are skipped; elements after `vertex` are ignored. Throws ParseError with the
/// byte offset of the problem.
PointCloud decode_ply(const std::string& bytes);

void write_ply(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud read_ply(const std::filesystem::path& path);

}  // namespace nss
