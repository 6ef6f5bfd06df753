#include "nss/config_json.hpp"

#include "nss/error.hpp"

#include <set>

namespace nss {

namespace {

/// Reads keys of one object and rejects those nobody asked for.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    }
    ~ObjectReader() noexcept(false) {
        if (std::uncaught_exceptions() > 0) return;
        for (const auto& [key, _] : j_.items())
            if (!seen_.count(key)) throw ConfigError(path_ + "." + key + ": unknown key");
    }

    const Json* find(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    std::string at(const char* key) const { return path_ + "." + key; }

    void number(const char* key, double& out) {
        if (const Json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(at(key) + ": expected a number");
            out = v->get<double>();
        }
    }
    template <class I>
    void integer(const char* key, I& out) {
        if (const Json* v = find(key)) {
            if (!v->is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
            if constexpr (std::is_unsigned_v<I>) {
                if (v->is_number_unsigned()) {
                    out = v->get<I>();
                    return;
                }
                if (v->get<std::int64_t>() < 0) throw ConfigError(at(key) + ": expected a non-negative integer");
            }
            out = static_cast<I>(v->get<std::int64_t>());
        }
    }
    void boolean(const char* key, bool& out) {
        if (const Json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(at(key) + ": expected true or false");
            out = v->get<bool>();
        }
    }
    bool string(const char* key, std::string& out) {
        if (const Json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(at(key) + ": expected a string");
            out = v->get<std::string>();
            return true;
        }
        return false;
    }
    void vec3(const char* key, Eigen::Vector3d& out) {
        if (const Json* v = find(key)) {
            if (!v->is_array() || v->size() != 3) throw ConfigError(at(key) + ": expected 3 numbers");
            for (int i = 0; i < 3; ++i) {
                if (!(*v)[i].is_number()) throw ConfigError(at(key) + ": expected 3 numbers");
                out[i] = (*v)[i].get<double>();
            }
        }
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Json array3(const Eigen::Vector3d& v) { return Json::array({v.x(), v.y(), v.z()}); }

// rethrow parse errors of enum names with the key path prepended
template <class F>
auto named(const std::string& path, F&& parse) {
    try {
        return parse();
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace

Json parse_config_text(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::exception& e) {
        throw ConfigError(what + ": malformed JSON: " + e.what());
    }
}

Json to_json(const FieldConfig& c) {
    return {{"l_pos", c.encoding.l_pos},
            {"l_dir", c.encoding.l_dir},
            {"include_input", c.encoding.include_input},
            {"width", c.width},
            {"hidden_layers", c.hidden_layers},
            {"skip_layer", c.skip_layer},
            {"use_view_dirs", c.use_view_dirs},
            {"dir_width", c.dir_width},
            {"bounds_center", array3(c.bounds.center)},
            {"bounds_half_extent", c.bounds.half_extent}};
}

void read_json(const Json& j, FieldConfig& c, const std::string& path) {
    ObjectReader r(j, path);
    r.integer("l_pos", c.encoding.l_pos);
    r.integer("l_dir", c.encoding.l_dir);
    r.boolean("include_input", c.encoding.include_input);
    r.integer("width", c.width);
    r.integer("hidden_layers", c.hidden_layers);
    r.integer("skip_layer", c.skip_layer);
    r.boolean("use_view_dirs", c.use_view_dirs);
    r.integer("dir_width", c.dir_width);
    r.vec3("bounds_center", c.bounds.center);
    r.number("bounds_half_extent", c.bounds.half_extent);
}

Json to_json(const SamplerConfig& c) {
    return {{"kind", to_string(c.kind)},     {"n_samples", c.n_samples},   {"alpha", c.alpha},
            {"near_clip", c.near_clip},      {"shared_jitter", c.shared_jitter}, {"t_near", c.t_near},
            {"t_far", c.t_far},              {"range_scale", c.range_scale}};
}

void read_json(const Json& j, SamplerConfig& c, const std::string& path) {
    ObjectReader r(j, path);
    std::string kind;
    if (r.string("kind", kind)) c.kind = named(r.at("kind"), [&] { return parse_sampler(kind); });
    r.integer("n_samples", c.n_samples);
    r.number("alpha", c.alpha);
    r.number("near_clip", c.near_clip);
    r.boolean("shared_jitter", c.shared_jitter);
    r.number("t_near", c.t_near);
    r.number("t_far", c.t_far);
    r.number("range_scale", c.range_scale);
}

Json to_json(const RenderConfig& c) {
    return {{"background_color", array3(c.background_color)},
            {"white_background", c.white_background},
            {"sigma_scale", c.sigma_scale}};
}

void read_json(const Json& j, RenderConfig& c, const std::string& path) {
    ObjectReader r(j, path);
    r.vec3("background_color", c.background_color);
    r.boolean("white_background", c.white_background);
    r.number("sigma_scale", c.sigma_scale);
}

Json to_json(const TrainConfig& c) {
    return {{"iterations", c.iterations},
            {"batch_rays", c.batch_rays},
            {"lr", c.lr},
            {"lr_dropped", c.lr_dropped},
            {"lr_drop_fraction", c.lr_drop_fraction},
            {"sampler", to_json(c.sampler)},
            {"skip_background_rays", c.skip_background_rays},
            {"field", to_json(c.field)},
            {"render", to_json(c.render)},
            {"seed", c.seed},
            {"log_every", c.log_every}};
}

void read_json(const Json& j, TrainConfig& c, const std::string& path) {
    ObjectReader r(j, path);
    r.integer("iterations", c.iterations);
    r.integer("batch_rays", c.batch_rays);
    r.number("lr", c.lr);
    r.number("lr_dropped", c.lr_dropped);
    r.number("lr_drop_fraction", c.lr_drop_fraction);
    if (const Json* v = r.find("sampler")) read_json(*v, c.sampler, r.at("sampler"));
    r.boolean("skip_background_rays", c.skip_background_rays);
    if (const Json* v = r.find("field")) read_json(*v, c.field, r.at("field"));
    if (const Json* v = r.find("render")) read_json(*v, c.render, r.at("render"));
    r.integer("seed", c.seed);
    r.integer("log_every", c.log_every);
    r.integer("threads", c.threads);
}

Json to_json(const HoleFillConfig& c) {
    return {{"kappa", c.kappa},
            {"window", c.window},
            {"statistics", c.statistics == HoleStatistics::whole_window ? "whole_window" : "nonzero_only"}};
}

void read_json(const Json& j, HoleFillConfig& c, const std::string& path) {
    ObjectReader r(j, path);
    r.number("kappa", c.kappa);
    r.integer("window", c.window);
    std::string stats;
    if (r.string("statistics", stats)) {
        if (stats == "whole_window") c.statistics = HoleStatistics::whole_window;
        else if (stats == "nonzero_only") c.statistics = HoleStatistics::nonzero_only;
        else throw ConfigError(r.at("statistics") + ": expected whole_window or nonzero_only");
    }
}

Json to_json(const EvalConfig& c) {
    return {{"sampler", to_json(c.sampler)},
            {"depth_source", to_string(c.depth_source)},
            {"hole_fill", to_json(c.hole_fill)},
            {"fill_holes", c.fill_holes},
            {"render", to_json(c.render)},
            {"seed", c.seed}};
}

void read_json(const Json& j, EvalConfig& c, const std::string& path) {
    ObjectReader r(j, path);
    if (const Json* v = r.find("sampler")) read_json(*v, c.sampler, r.at("sampler"));
    std::string source;
    if (r.string("depth_source", source))
        c.depth_source = named(r.at("depth_source"), [&] { return parse_depth_source(source); });
    if (const Json* v = r.find("hole_fill")) read_json(*v, c.hole_fill, r.at("hole_fill"));
    r.boolean("fill_holes", c.fill_holes);
    if (const Json* v = r.find("render")) read_json(*v, c.render, r.at("render"));
    r.integer("seed", c.seed);
    r.integer("threads", c.threads);
}

Json to_json(const RefineConfig& c) { return {{"tau", c.tau}, {"stride", c.stride}}; }

void read_json(const Json& j, RefineConfig& c, const std::string& path) {
    ObjectReader r(j, path);
    r.number("tau", c.tau);
    r.integer("stride", c.stride);
}

Json to_json(const SynthOptions& c) {
    return {{"views", c.orbit.count},
            {"radius", c.orbit.radius},
            {"elevation_min_deg", c.orbit.elevation_min_deg},
            {"elevation_max_deg", c.orbit.elevation_max_deg},
            {"turns", c.orbit.turns},
            {"phase", c.orbit.phase},
            {"resolution", c.resolution},
            {"fov_deg", c.fov_deg},
            {"noise", c.depth_noise_sigma},
            {"depth_scale", c.depth_scale},
            {"seed", c.seed}};
}

void read_json(const Json& j, SynthOptions& c, const std::string& path) {
    ObjectReader r(j, path);
    r.integer("views", c.orbit.count);
    r.number("radius", c.orbit.radius);
    r.number("elevation_min_deg", c.orbit.elevation_min_deg);
    r.number("elevation_max_deg", c.orbit.elevation_max_deg);
    r.number("turns", c.orbit.turns);
    r.number("phase", c.orbit.phase);
    r.integer("resolution", c.resolution);
    r.number("fov_deg", c.fov_deg);
    r.number("noise", c.depth_noise_sigma);
    r.number("depth_scale", c.depth_scale);
    r.integer("seed", c.seed);
}

}  // namespace nss
