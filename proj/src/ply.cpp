#include "nss/ply.hpp"

#include "nss/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

namespace nss {

static_assert(std::endian::native == std::endian::little, "PLY codec assumes a little-endian host");

namespace {

enum class ScalarType { i8, u8, i16, u16, i32, u32, f32, f64 };

struct Property {
    std::string name;
    ScalarType type;
};

std::size_t type_size(ScalarType t) {
    switch (t) {
        case ScalarType::i8:
        case ScalarType::u8: return 1;
        case ScalarType::i16:
        case ScalarType::u16: return 2;
        case ScalarType::i32:
        case ScalarType::u32:
        case ScalarType::f32: return 4;
        case ScalarType::f64: return 8;
    }
    return 0;
}

bool parse_type(const std::string& s, ScalarType& t) {
    if (s == "char" || s == "int8") t = ScalarType::i8;
    else if (s == "uchar" || s == "uint8") t = ScalarType::u8;
    else if (s == "short" || s == "int16") t = ScalarType::i16;
    else if (s == "ushort" || s == "uint16") t = ScalarType::u16;
    else if (s == "int" || s == "int32") t = ScalarType::i32;
    else if (s == "uint" || s == "uint32") t = ScalarType::u32;
    else if (s == "float" || s == "float32") t = ScalarType::f32;
    else if (s == "double" || s == "float64") t = ScalarType::f64;
    else return false;
    return true;
}

template <class T>
T load(const char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

double read_scalar(const char* p, ScalarType t) {
    switch (t) {
        case ScalarType::i8: return load<std::int8_t>(p);
        case ScalarType::u8: return load<std::uint8_t>(p);
        case ScalarType::i16: return load<std::int16_t>(p);
        case ScalarType::u16: return load<std::uint16_t>(p);
        case ScalarType::i32: return load<std::int32_t>(p);
        case ScalarType::u32: return load<std::uint32_t>(p);
        case ScalarType::f32: return load<float>(p);
        case ScalarType::f64: return load<double>(p);
    }
    return 0.0;
}

template <class T>
void append(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

std::uint8_t color_byte(double c) { return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)); }

}  // namespace

std::string encode_ply(const PointCloud& cloud) {
    std::string out;
    out += "ply\nformat binary_little_endian 1.0\n";
    out += "element vertex " + std::to_string(cloud.size()) + "\n";
    out += "property float x\nproperty float y\nproperty float z\n";
    out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out += "end_header\n";
    out.reserve(out.size() + cloud.size() * 15);
    for (const auto& p : cloud.points) {
        for (int a = 0; a < 3; ++a) append(out, static_cast<float>(p.position[a]));
        for (int c = 0; c < 3; ++c) append(out, color_byte(p.color[c]));
    }
    return out;
}

PointCloud decode_ply(const std::string& bytes) {
    std::size_t pos = 0;
    const auto next_line = [&](std::string& line) {
        const std::size_t nl = bytes.find('\n', pos);
        if (nl == std::string::npos) throw ParseError("PLY header: unterminated line", pos);
        line = bytes.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t start = pos;
        pos = nl + 1;
        return start;
    };

    std::string line;
    next_line(line);
    if (line != "ply") throw ParseError("PLY header: missing 'ply' magic", 0);

    bool format_seen = false;
    bool in_vertex = false;
    bool vertex_seen = false;
    std::size_t vertex_count = 0;
    std::vector<Property> props;
    // bytes per record of elements declared before `vertex`, which must be skipped
    std::size_t preceding_bytes = 0;
    std::size_t current_count = 0;
    std::size_t current_stride = 0;
    bool current_is_other = false;

    while (true) {
        const std::size_t line_start = next_line(line);
        std::istringstream ls(line);
        std::string keyword;
        ls >> keyword;
        if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
        if (keyword == "end_header") break;
        if (keyword == "format") {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt != "binary_little_endian")
                throw ParseError("PLY header: unsupported format '" + fmt + "'", line_start);
            format_seen = true;
        } else if (keyword == "element") {
            if (current_is_other && !vertex_seen) preceding_bytes += current_count * current_stride;
            std::string name;
            long long count = -1;
            ls >> name >> count;
            if (!ls || count < 0) throw ParseError("PLY header: malformed element line", line_start);
            in_vertex = name == "vertex";
            current_is_other = !in_vertex;
            current_count = static_cast<std::size_t>(count);
            current_stride = 0;
            if (in_vertex) {
                if (vertex_seen) throw ParseError("PLY header: duplicate vertex element", line_start);
                vertex_seen = true;
                vertex_count = current_count;
            }
        } else if (keyword == "property") {
            std::string type_name, name;
            ls >> type_name;
            if (type_name == "list") {
                if (in_vertex || !vertex_seen)
                    throw ParseError("PLY header: list properties are not supported here", line_start);
                continue;  // list in an element after vertex: never read
            }
            ls >> name;
            ScalarType t;
            if (!ls || !parse_type(type_name, t))
                throw ParseError("PLY header: bad property type '" + type_name + "'", line_start);
            if (in_vertex) props.push_back({name, t});
            else current_stride += type_size(t);
        } else {
            throw ParseError("PLY header: unknown keyword '" + keyword + "'", line_start);
        }
    }
    if (!format_seen) throw ParseError("PLY header: missing format line", pos);
    if (!vertex_seen) throw ParseError("PLY header: missing vertex element", pos);

    std::size_t stride = 0;
    std::vector<std::size_t> offsets;
    int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
    for (std::size_t i = 0; i < props.size(); ++i) {
        offsets.push_back(stride);
        stride += type_size(props[i].type);
        const std::string& n = props[i].name;
        const int idx = static_cast<int>(i);
        if (n == "x") ix = idx;
        else if (n == "y") iy = idx;
        else if (n == "z") iz = idx;
        else if (n == "red" || n == "r") ir = idx;
        else if (n == "green" || n == "g") ig = idx;
        else if (n == "blue" || n == "b") ib = idx;
    }
    if (ix < 0 || iy < 0 || iz < 0) throw ParseError("PLY header: vertex lacks x/y/z", pos);
    const bool has_color = ir >= 0 && ig >= 0 && ib >= 0;

    const std::size_t body = pos + preceding_bytes;
    const std::size_t need = vertex_count * stride;
    if (body > bytes.size() || bytes.size() - body < need) {
        const std::size_t have_records = body > bytes.size() ? 0 : (bytes.size() - body) / std::max<std::size_t>(stride, 1);
        throw ParseError("PLY payload truncated: expected " + std::to_string(vertex_count) + " vertices, found " +
                             std::to_string(have_records),
                         std::min(bytes.size(), body + have_records * stride));
    }

    const auto color_value = [&](int i, const char* rec) {
        const double v = read_scalar(rec + offsets[i], props[i].type);
        return props[i].type == ScalarType::f32 || props[i].type == ScalarType::f64 ? v : v / 255.0;
    };

    PointCloud cloud;
    cloud.points.reserve(vertex_count);
    for (std::size_t v = 0; v < vertex_count; ++v) {
        const char* rec = bytes.data() + body + v * stride;
        CloudPoint p;
        p.position = {read_scalar(rec + offsets[ix], props[ix].type), read_scalar(rec + offsets[iy], props[iy].type),
                      read_scalar(rec + offsets[iz], props[iz].type)};
        if (!p.position.allFinite())
            throw ParseError("PLY payload: non-finite vertex " + std::to_string(v), body + v * stride);
        if (has_color) p.color = {color_value(ir, rec), color_value(ig, rec), color_value(ib, rec)};
        cloud.points.push_back(p);
    }
    return cloud;
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    const std::string bytes = encode_ply(cloud);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + path.string());
}

PointCloud read_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_ply(bytes);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.detail(), e.offset());
    }
}

}  // namespace nss
