#include "nss/checkpoint.hpp"

#include "nss/config_json.hpp"
#include "nss/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nss {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
    return std::filesystem::path(stem.string() + suffix);
}

std::uint32_t to_little(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
    return v;
}

}  // namespace

void save_checkpoint(const RadianceField<float>& field, std::int64_t step, double lr,
                     const std::filesystem::path& stem) {
    const auto params = field.params();
    std::string bytes(params.size() * 4, '\0');
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::uint32_t v = to_little(std::bit_cast<std::uint32_t>(params[i]));
        std::memcpy(bytes.data() + 4 * i, &v, 4);
    }
    const auto bin = with_suffix(stem, ".bin");
    std::ofstream out(bin, std::ios::binary);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size())))
        throw DataError("cannot write " + bin.string());

    Json meta = {{"format", "nss-field"},
                 {"version", 1},
                 {"dtype", "float32"},
                 {"byte_order", "little"},
                 {"num_params", params.size()},
                 {"field", to_json(field.config())},
                 {"step", step},
                 {"lr", lr}};
    const auto js = with_suffix(stem, ".json");
    std::ofstream mout(js);
    if (!mout || !(mout << meta.dump(2) << '\n')) throw DataError("cannot write " + js.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& stem) {
    const auto js = with_suffix(stem, ".json");
    std::ifstream min(js);
    if (!min) throw DataError("cannot open " + js.string());
    std::stringstream text;
    text << min.rdbuf();
    Json meta;
    try {
        meta = Json::parse(text.str());
    } catch (const Json::exception& e) {
        throw DataError(js.string() + ": malformed JSON: " + e.what());
    }
    if (!meta.is_object() || meta.value("format", "") != "nss-field" || meta.value("dtype", "") != "float32")
        throw DataError(js.string() + ": not a float32 field checkpoint");

    FieldConfig cfg;
    try {
        read_json(meta.at("field"), cfg, "field");
        cfg.validate();
    } catch (const ConfigError& e) {
        throw DataError(js.string() + ": " + e.what());
    } catch (const Json::exception& e) {
        throw DataError(js.string() + ": " + e.what());
    }
    Checkpoint ck{RadianceField<float>(cfg), meta.value("step", std::int64_t{0}), meta.value("lr", 0.0)};
    const std::size_t n = ck.field.num_params();
    if (meta.value("num_params", std::size_t{0}) != n)
        throw DataError(js.string() + ": num_params does not match the field configuration");

    const auto bin = with_suffix(stem, ".bin");
    std::ifstream in(bin, std::ios::binary);
    if (!in) throw DataError("cannot open " + bin.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() != 4 * n)
        throw DataError(bin.string() + ": expected " + std::to_string(4 * n) + " bytes, found " +
                        std::to_string(bytes.size()));
    auto params = ck.field.params();
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t v;
        std::memcpy(&v, bytes.data() + 4 * i, 4);
        params[i] = std::bit_cast<float>(to_little(v));
    }
    return ck;
}

}  // namespace nss
