#include "nss/synthetic.hpp"

#include "nss/error.hpp"
#include "nss/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nss {

using nlohmann::json;

namespace {

constexpr double kHitEpsilon = 1e-9;

std::optional<double> hit_sphere(const Sphere& s, const Ray& ray) {
    const Eigen::Vector3d oc = ray.origin - s.center;
    const double b = oc.dot(ray.direction);
    const double c = oc.squaredNorm() - s.radius * s.radius;
    const double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    const double root = std::sqrt(disc);
    const double t0 = -b - root;
    const double t1 = -b + root;
    if (t0 > kHitEpsilon) return t0;
    if (t1 > kHitEpsilon) return t1;
    return std::nullopt;
}

std::optional<std::pair<double, Eigen::Vector3d>> hit_box(const Box& box, const Ray& ray) {
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    int enter_axis = -1;
    double enter_sign = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double o = ray.origin[a];
        const double d = ray.direction[a];
        if (std::abs(d) < 1e-15) {
            if (o < box.min_corner[a] || o > box.max_corner[a]) return std::nullopt;
            continue;
        }
        double t0 = (box.min_corner[a] - o) / d;
        double t1 = (box.max_corner[a] - o) / d;
        double sign = -1.0;
        if (t0 > t1) {
            std::swap(t0, t1);
            sign = 1.0;
        }
        if (t0 > t_enter) {
            t_enter = t0;
            enter_axis = a;
            enter_sign = sign;
        }
        t_exit = std::min(t_exit, t1);
    }
    if (t_enter > t_exit || enter_axis < 0) return std::nullopt;
    if (t_enter > kHitEpsilon) {
        Eigen::Vector3d n = Eigen::Vector3d::Zero();
        n[enter_axis] = enter_sign;
        return std::make_pair(t_enter, n);
    }
    return std::nullopt;  // origin inside the box: not a visible surface
}

Eigen::Vector3d vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(path + ": expected an array of 3 numbers");
    Eigen::Vector3d v;
    for (int i = 0; i < 3; ++i) {
        if (!j[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
        v[i] = j[i].get<double>();
    }
    return v;
}

json to_array(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

void SyntheticSceneSpec::validate() const {
    if (spheres.empty() && boxes.empty()) throw ConfigError("scene: at least one primitive is required");
    for (std::size_t i = 0; i < spheres.size(); ++i) {
        const std::string p = "spheres[" + std::to_string(i) + "]";
        if (!(spheres[i].radius > 0.0)) throw ConfigError(p + ".radius: must be positive");
        if (!spheres[i].center.allFinite()) throw ConfigError(p + ".center: must be finite");
        if ((spheres[i].albedo.array() < 0.0).any() || (spheres[i].albedo.array() > 1.0).any())
            throw ConfigError(p + ".albedo: channels must lie in [0, 1]");
    }
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const std::string p = "boxes[" + std::to_string(i) + "]";
        if (!(boxes[i].min_corner.array() < boxes[i].max_corner.array()).all())
            throw ConfigError(p + ": min must be < max on every axis");
        if ((boxes[i].albedo.array() < 0.0).any() || (boxes[i].albedo.array() > 1.0).any())
            throw ConfigError(p + ".albedo: channels must lie in [0, 1]");
    }
    if (std::abs(light_direction.norm() - 1.0) > 1e-6) throw ConfigError("light_direction: must be a unit vector");
    if (!(ambient >= 0.0 && ambient <= 1.0)) throw ConfigError("ambient: must lie in [0, 1]");
}

SyntheticSceneSpec SyntheticSceneSpec::default_scene() {
    SyntheticSceneSpec s;
    s.spheres.push_back({Eigen::Vector3d(0.0, 0.0, 0.05), 0.6, Rgb(0.85, 0.3, 0.25)});
    s.spheres.push_back({Eigen::Vector3d(0.55, 0.45, -0.35), 0.25, Rgb(0.35, 0.8, 0.35)});
    s.boxes.push_back({Eigen::Vector3d(-0.9, -0.9, -0.85), Eigen::Vector3d(0.9, 0.9, -0.6), Rgb(0.3, 0.55, 0.85)});
    s.light_direction = Eigen::Vector3d(0.4, 0.3, 0.85).normalized();
    s.ambient = 0.3;
    return s;
}

SyntheticSceneSpec SyntheticSceneSpec::sphere_scene(const Eigen::Vector3d& center, double radius) {
    SyntheticSceneSpec s;
    s.spheres.push_back({center, radius, Rgb(0.8, 0.6, 0.4)});
    s.light_direction = Eigen::Vector3d(0.4, 0.3, 0.85).normalized();
    s.ambient = 0.3;
    return s;
}

std::string SyntheticSceneSpec::to_json() const {
    json j;
    j["spheres"] = json::array();
    for (const auto& s : spheres)
        j["spheres"].push_back({{"center", to_array(s.center)}, {"radius", s.radius}, {"albedo", to_array(s.albedo)}});
    j["boxes"] = json::array();
    for (const auto& b : boxes)
        j["boxes"].push_back(
            {{"min", to_array(b.min_corner)}, {"max", to_array(b.max_corner)}, {"albedo", to_array(b.albedo)}});
    j["light_direction"] = to_array(light_direction);
    j["ambient"] = ambient;
    return j.dump(2);
}

SyntheticSceneSpec SyntheticSceneSpec::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scene: malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("scene: expected a JSON object");
    SyntheticSceneSpec s;
    const auto number = [](const json& v, const std::string& path) {
        if (!v.is_number()) throw ConfigError(path + ": expected a number");
        return v.get<double>();
    };
    if (j.contains("spheres")) {
        const json& arr = j["spheres"];
        if (!arr.is_array()) throw ConfigError("spheres: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = "spheres[" + std::to_string(i) + "]";
            Sphere sp;
            sp.center = vec3(arr[i].value("center", json()), p + ".center");
            sp.radius = number(arr[i].value("radius", json()), p + ".radius");
            if (arr[i].contains("albedo")) sp.albedo = vec3(arr[i]["albedo"], p + ".albedo");
            s.spheres.push_back(sp);
        }
    }
    if (j.contains("boxes")) {
        const json& arr = j["boxes"];
        if (!arr.is_array()) throw ConfigError("boxes: expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string p = "boxes[" + std::to_string(i) + "]";
            Box b;
            b.min_corner = vec3(arr[i].value("min", json()), p + ".min");
            b.max_corner = vec3(arr[i].value("max", json()), p + ".max");
            if (arr[i].contains("albedo")) b.albedo = vec3(arr[i]["albedo"], p + ".albedo");
            s.boxes.push_back(b);
        }
    }
    if (j.contains("light_direction")) {
        s.light_direction = vec3(j["light_direction"], "light_direction");
        if (std::abs(s.light_direction.norm() - 1.0) > 1e-12) s.light_direction.normalize();
    }
    if (j.contains("ambient")) s.ambient = number(j["ambient"], "ambient");
    s.validate();
    return s;
}

std::optional<SurfaceHit> intersect(const SyntheticSceneSpec& scene, const Ray& ray) {
    std::optional<SurfaceHit> best;
    for (const auto& s : scene.spheres) {
        if (auto t = hit_sphere(s, ray); t && (!best || *t < best->distance))
            best = SurfaceHit{*t, (ray.at(*t) - s.center).normalized(), s.albedo};
    }
    for (const auto& b : scene.boxes) {
        if (auto h = hit_box(b, ray); h && (!best || h->first < best->distance))
            best = SurfaceHit{h->first, h->second, b.albedo};
    }
    return best;
}

SyntheticView render_synthetic(const SyntheticSceneSpec& scene, const CameraIntrinsics& intr, const Pose& pose,
                               double depth_noise_sigma, std::uint64_t seed) {
    if (!(depth_noise_sigma >= 0.0)) throw DomainError("render_synthetic: noise sigma must be >= 0");
    SyntheticView view{ColorImage(intr.width, intr.height, Rgb::Zero()), DepthImage(intr.width, intr.height, 0.0),
                       Mask(intr.width, intr.height, 1)};
    Rng rng(seed);
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            const Ray ray = pixel_ray(intr, pose, Eigen::Vector2d(x, y));
            const auto hit = intersect(scene, ray);
            if (!hit) continue;
            const double lambert = std::max(0.0, hit->normal.dot(scene.light_direction));
            view.color(x, y) = hit->albedo * (scene.ambient + (1.0 - scene.ambient) * lambert);
            double d = hit->distance;
            if (depth_noise_sigma > 0.0) d = std::max(d + rng.normal(0.0, depth_noise_sigma), 1e-6);
            view.depth(x, y) = d;
            view.background(x, y) = 0;
        }
    }
    return view;
}

std::vector<Pose> orbit_poses(const OrbitOptions& opts) {
    std::vector<Pose> poses;
    poses.reserve(opts.count);
    const double deg = std::numbers::pi / 180.0;
    for (int i = 0; i < opts.count; ++i) {
        const double f = opts.count > 1 ? static_cast<double>(i) / (opts.count - 1) : 0.0;
        const double elev = (opts.elevation_min_deg + f * (opts.elevation_max_deg - opts.elevation_min_deg)) * deg;
        const double azim = 2.0 * std::numbers::pi * opts.turns * (i + opts.phase) / opts.count;
        const Eigen::Vector3d eye(opts.radius * std::cos(elev) * std::cos(azim),
                                  opts.radius * std::cos(elev) * std::sin(azim), opts.radius * std::sin(elev));
        poses.push_back(Pose::look_at(eye, Eigen::Vector3d::Zero()));
    }
    return poses;
}

void SynthOptions::validate() const {
    if (orbit.count < 1) throw ConfigError("views: must be >= 1");
    if (!(orbit.radius > 0.0)) throw ConfigError("radius: must be positive");
    if (resolution < 1) throw ConfigError("resolution: must be >= 1");
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw ConfigError("fov_deg: must lie in (0, 180)");
    if (!(depth_noise_sigma >= 0.0)) throw ConfigError("noise: must be >= 0");
    if (!(depth_scale > 0.0)) throw ConfigError("depth_scale: must be positive");
}

Dataset synthesize_dataset(const SyntheticSceneSpec& scene, const SynthOptions& opts) {
    scene.validate();
    opts.validate();
    Dataset ds;
    ds.intrinsics = CameraIntrinsics::from_fov(opts.resolution, opts.resolution, opts.fov_deg * std::numbers::pi / 180.0);
    ds.depth_scale = opts.depth_scale;
    const auto poses = orbit_poses(opts.orbit);
    for (std::size_t i = 0; i < poses.size(); ++i) {
        SyntheticView v = render_synthetic(scene, ds.intrinsics, poses[i], opts.depth_noise_sigma, mix64(opts.seed) ^ mix64(i));
        Frame f;
        f.pose = poses[i];
        f.color = std::move(v.color);
        f.depth = std::move(v.depth);
        f.background = std::move(v.background);
        ds.frames.push_back(std::move(f));
    }
    return ds;
}

}  // namespace nss
