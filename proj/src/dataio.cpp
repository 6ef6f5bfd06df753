#include "nss/dataio.hpp"
#include "nss/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace nss {

namespace fs = std::filesystem;
using nlohmann::json;

bool Dataset::has_depth() const {
    if (frames.empty()) return false;
    for (const auto& f : frames)
        if (!f.has_depth()) return false;
    return true;
}

void Dataset::validate() const {
    try {
        intrinsics.validate();
    } catch (const DomainError& e) {
        throw DataError(e.what());
    }
    if (!(depth_scale > 0.0)) throw DataError("dataset: depth_scale must be positive");
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const Frame& f = frames[i];
        const std::string where = "frame " + std::to_string(i);
        if (f.color.width() != intrinsics.width || f.color.height() != intrinsics.height)
            throw DataError(where + ": color image size does not match intrinsics");
        if (f.depth) {
            if (f.depth->width() != intrinsics.width || f.depth->height() != intrinsics.height)
                throw DataError(where + ": depth image size does not match intrinsics");
            if (f.background != background_mask(*f.depth))
                throw DataError(where + ": background mask disagrees with depth");
        }
        try {
            f.pose.validate();
        } catch (const DomainError& e) {
            throw DataError(where + ": " + e.what());
        }
    }
}

Dataset Dataset::subset(int stride) const {
    if (stride < 1) throw ConfigError("subset stride must be >= 1");
    Dataset out;
    out.intrinsics = intrinsics;
    out.depth_scale = depth_scale;
    for (std::size_t i = 0; i < frames.size(); i += static_cast<std::size_t>(stride)) out.frames.push_back(frames[i]);
    return out;
}

std::uint16_t quantize_depth(double value, double scale) {
    if (!(value >= 0.0) || !std::isfinite(value)) throw DataError("depth value is negative or non-finite");
    if (value == 0.0) return 0;
    const double q = std::round(value / scale);
    if (q > std::numeric_limits<std::uint16_t>::max())
        throw DataError("depth value " + std::to_string(value) + " exceeds the 16-bit range at scale " +
                        std::to_string(scale));
    return static_cast<std::uint16_t>(std::max(q, 1.0));
}

namespace {

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("missing file " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw DataError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

template <class T>
T require(const json& j, const char* key, const fs::path& file) {
    if (!j.contains(key)) throw DataError(file.string() + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw DataError(file.string() + ": bad field '" + key + "': " + e.what());
    }
}

std::string frame_name(std::size_t i) {
    std::ostringstream os;
    os.width(4);
    os.fill('0');
    os << i;
    return os.str() + ".png";
}

}  // namespace

Dataset load_dataset(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    const json manifest = read_json(manifest_path);
    Dataset ds;
    const json intr = manifest.value("intrinsics", json());
    if (!intr.is_object()) throw DataError(manifest_path.string() + ": missing field 'intrinsics'");
    ds.intrinsics.fx = require<double>(intr, "fx", manifest_path);
    ds.intrinsics.fy = require<double>(intr, "fy", manifest_path);
    ds.intrinsics.cx = require<double>(intr, "cx", manifest_path);
    ds.intrinsics.cy = require<double>(intr, "cy", manifest_path);
    ds.intrinsics.width = require<int>(intr, "width", manifest_path);
    ds.intrinsics.height = require<int>(intr, "height", manifest_path);
    ds.depth_scale = manifest.value("depth_scale", 1e-4);
    const auto frames = require<std::vector<json>>(manifest, "frames", manifest_path);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const json& fj = frames[i];
        Frame frame;
        const auto pose = require<std::vector<double>>(fj, "pose", manifest_path);
        if (pose.size() != 16)
            throw DataError(manifest_path.string() + ": frame " + std::to_string(i) + " pose must have 16 numbers");
        Eigen::Matrix4d m;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) m(r, c) = pose[4 * r + c];
        frame.pose = Pose::from_matrix(m);
        const fs::path color_path = dir / require<std::string>(fj, "color", manifest_path);
        frame.color = read_color_png(color_path);
        if (frame.color.width() != ds.intrinsics.width || frame.color.height() != ds.intrinsics.height)
            throw DataError(color_path.string() + ": image size does not match intrinsics");
        if (fj.contains("depth")) {
            const fs::path depth_path = dir / require<std::string>(fj, "depth", manifest_path);
            frame.depth = read_depth_png(depth_path, ds.depth_scale);
            if (frame.depth->width() != ds.intrinsics.width || frame.depth->height() != ds.intrinsics.height)
                throw DataError(depth_path.string() + ": image size does not match intrinsics");
            frame.background = background_mask(*frame.depth);
        }
        ds.frames.push_back(std::move(frame));
    }
    ds.validate();
    return ds;
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
    dataset.validate();
    fs::create_directories(dir / "color");
    if (std::any_of(dataset.frames.begin(), dataset.frames.end(), [](const Frame& f) { return f.has_depth(); }))
        fs::create_directories(dir / "depth");
    json frames = json::array();
    for (std::size_t i = 0; i < dataset.frames.size(); ++i) {
        const Frame& f = dataset.frames[i];
        json fj;
        const Eigen::Matrix4d m = f.pose.matrix();
        std::vector<double> pose(16);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) pose[4 * r + c] = m(r, c);
        fj["pose"] = pose;
        const std::string name = frame_name(i);
        fj["color"] = "color/" + name;
        write_color_png(f.color, dir / "color" / name);
        if (f.depth) {
            fj["depth"] = "depth/" + name;
            write_depth_png(*f.depth, dataset.depth_scale, dir / "depth" / name);
        }
        frames.push_back(std::move(fj));
    }
    const auto& in = dataset.intrinsics;
    json manifest;
    manifest["intrinsics"] = {{"fx", in.fx}, {"fy", in.fy}, {"cx", in.cx},
                              {"cy", in.cy}, {"width", in.width}, {"height", in.height}};
    manifest["depth_scale"] = dataset.depth_scale;
    manifest["frames"] = std::move(frames);
    std::ofstream out(dir / "manifest.json");
    if (!out) throw DataError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << "\n";
}

}  // namespace nss
