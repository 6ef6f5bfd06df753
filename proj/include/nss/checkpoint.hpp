#pragma once

#include "nss/field.hpp"

#include <cstdint>
#include <filesystem>

namespace nss {

struct Checkpoint {
    RadianceField<float> field;
    std::int64_t step = 0;
    double lr = 0.0;
};

/// Writes `<stem>.bin` (flat little-endian float32 parameters in layer order,
/// each layer's column-major weight followed by its bias) and `<stem>.json`
/// (field configuration, parameter count, step, learning rate).
void save_checkpoint(const RadianceField<float>& field, std::int64_t step, double lr,
                     const std::filesystem::path& stem);

/// Throws DataError on missing files, a parameter-count mismatch, or a short
/// payload.
Checkpoint load_checkpoint(const std::filesystem::path& stem);

}  // namespace nss
