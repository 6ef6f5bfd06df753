// nss: command-line front end for dataset synthesis, point-cloud building,
// depth estimation, training, evaluation, and parameter sweeps.

#include "nss/checkpoint.hpp"
#include "nss/config_json.hpp"
#include "nss/dataio.hpp"
#include "nss/depthmap.hpp"
#include "nss/error.hpp"
#include "nss/ply.hpp"
#include "nss/pointcloud.hpp"
#include "nss/synthetic.hpp"
#include "nss/trainer.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nss::Json;

namespace {

void log_line(const std::string& msg) { std::cerr << "nss: " << msg << '\n'; }

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Common {
    std::string out = ".";
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

fs::path resolve(const Common& c, const std::string& p) {
    const fs::path q(p);
    return q.is_absolute() ? q : fs::path(c.out) / q;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw nss::ConfigError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw nss::DataError("cannot write " + path.string());
}

void require_file(const fs::path& path, const std::string& what) {
    if (!fs::is_regular_file(path)) throw nss::ConfigError(what + ": " + path.string() + " does not exist");
}

void require_dataset(const fs::path& dir, const std::string& what) {
    require_file(dir / "manifest.json", what);
}

void require_checkpoint(const fs::path& stem) {
    require_file(fs::path(stem.string() + ".json"), "checkpoint");
    require_file(fs::path(stem.string() + ".bin"), "checkpoint");
}

/// Top-level config file: {"seed", "threads", "synth", "cloud", "hole_fill", "train", "eval"}.
struct Config {
    Json root = Json::object();

    const Json* section(const char* key) const {
        const auto it = root.find(key);
        return it == root.end() ? nullptr : &*it;
    }
};

Config load_config(const Common& c) {
    Config cfg;
    if (c.config.empty()) return cfg;
    cfg.root = nss::parse_config_text(read_text(c.config), c.config);
    if (!cfg.root.is_object()) throw nss::ConfigError(c.config + ": expected a JSON object");
    static const std::vector<std::string> known = {"seed", "threads", "synth", "cloud", "hole_fill",
                                                   "train", "eval"};
    for (const auto& [key, _] : cfg.root.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw nss::ConfigError(c.config + ": " + key + ": unknown key");
    for (const char* key : {"seed", "threads"})
        if (const Json* v = cfg.section(key); v && !v->is_number_unsigned())
            throw nss::ConfigError(std::string(key) + ": expected a non-negative integer");
    return cfg;
}

std::uint64_t global_seed(const Common& c, const Config& cfg, std::uint64_t fallback) {
    if (c.seed) return *c.seed;
    if (const Json* v = cfg.section("seed")) return v->get<std::uint64_t>();
    return fallback;
}

int global_threads(const Common& c, const Config& cfg) {
    if (c.threads) return *c.threads;
    if (const Json* v = cfg.section("threads")) return v->get<int>();
    return 0;
}

template <class T>
void set_if(const std::optional<T>& flag, T& target) {
    if (flag) target = *flag;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--out", c.out, "Output directory; relative paths resolve against it")->capture_default_str();
    app->add_option("--config", c.config, "JSON config file (flags override its values)");
    app->add_option("--seed", c.seed, "Seed for every stochastic component");
    app->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

// --- shared flag groups --------------------------------------------------------

struct SamplerFlags {
    std::optional<std::string> kind;
    std::optional<int> n_samples;
    std::optional<double> alpha;
    std::optional<double> near_clip;
    std::optional<double> t_near;
    std::optional<double> t_far;
    std::optional<double> range_scale;
    bool shared_jitter = false;

    void add(CLI::App* app) {
        app->add_option("--sampler", kind, "near_surface | full_range | hierarchical");
        app->add_option("--n-samples", n_samples, "Samples per ray");
        app->add_option("--alpha", alpha, "Near-surface half range");
        app->add_option("--near-clip", near_clip, "Lower clip of the near-surface interval");
        app->add_option("--t-near", t_near, "Full-range start");
        app->add_option("--t-far", t_far, "Full-range end");
        app->add_option("--range-scale", range_scale, "Full-range widening factor");
        app->add_flag("--shared-jitter", shared_jitter, "One jitter value per ray");
    }
    void apply(nss::SamplerConfig& s) const {
        if (kind) s.kind = nss::parse_sampler(*kind);
        set_if(n_samples, s.n_samples);
        set_if(alpha, s.alpha);
        set_if(near_clip, s.near_clip);
        set_if(t_near, s.t_near);
        set_if(t_far, s.t_far);
        set_if(range_scale, s.range_scale);
        if (shared_jitter) s.shared_jitter = true;
    }
};

struct TrainFlags {
    std::optional<std::int64_t> iterations;
    std::optional<int> batch;
    std::optional<double> lr;
    std::optional<int> log_every;
    bool skip_background = false;
    bool white_background = false;

    void add(CLI::App* app) {
        app->add_option("--iterations", iterations, "Training iterations");
        app->add_option("--batch", batch, "Rays per iteration");
        app->add_option("--lr", lr, "Initial learning rate");
        app->add_option("--log-every", log_every, "Loss log interval");
        app->add_flag("--skip-background", skip_background, "Exclude zero-depth pixels from training");
        app->add_flag("--white-background", white_background, "Composite over white");
    }
    void apply(nss::TrainConfig& t) const {
        set_if(iterations, t.iterations);
        set_if(batch, t.batch_rays);
        set_if(lr, t.lr);
        set_if(log_every, t.log_every);
        if (skip_background) t.skip_background_rays = true;
        if (white_background) t.render.white_background = true;
    }
};

struct HoleFlags {
    std::optional<double> kappa;
    std::optional<int> window;
    std::optional<std::string> statistics;
    bool no_fill = false;

    void add(CLI::App* app) {
        app->add_option("--kappa", kappa, "Hole threshold on (mu - p) / sigma");
        app->add_option("--window", window, "Odd hole-filling window size");
        app->add_option("--statistics", statistics, "whole_window | nonzero_only");
        app->add_flag("--no-fill", no_fill, "Skip hole filling");
    }
    void apply(nss::HoleFillConfig& h) const {
        set_if(kappa, h.kappa);
        set_if(window, h.window);
        if (statistics) {
            if (*statistics == "whole_window") h.statistics = nss::HoleStatistics::whole_window;
            else if (*statistics == "nonzero_only") h.statistics = nss::HoleStatistics::nonzero_only;
            else throw nss::ConfigError("--statistics: expected whole_window or nonzero_only");
        }
    }
};

nss::TrainConfig train_config(const Common& c, const Config& cfg, const SamplerFlags& sf, const TrainFlags& tf) {
    nss::TrainConfig t;
    t.seed = global_seed(c, cfg, t.seed);
    if (const Json* s = cfg.section("train")) nss::read_json(*s, t, "train");
    if (c.seed) t.seed = *c.seed;
    t.threads = c.threads ? *c.threads : (cfg.section("threads") ? global_threads(c, cfg) : t.threads);
    sf.apply(t.sampler);
    tf.apply(t);
    t.validate();
    return t;
}

nss::EvalConfig eval_config(const Common& c, const Config& cfg, const SamplerFlags& sf, const HoleFlags& hf,
                            const std::optional<std::string>& depth_source) {
    nss::EvalConfig e;
    e.seed = global_seed(c, cfg, e.seed);
    if (const Json* s = cfg.section("hole_fill")) nss::read_json(*s, e.hole_fill, "hole_fill");
    if (const Json* s = cfg.section("eval")) nss::read_json(*s, e, "eval");
    if (c.seed) e.seed = *c.seed;
    e.threads = c.threads ? *c.threads : (cfg.section("threads") ? global_threads(c, cfg) : e.threads);
    sf.apply(e.sampler);
    hf.apply(e.hole_fill);
    if (hf.no_fill) e.fill_holes = false;
    if (depth_source) e.depth_source = nss::parse_depth_source(*depth_source);
    e.validate();
    return e;
}

void write_metrics_csv(const fs::path& path, const std::vector<nss::TrainLogEntry>& log) {
    std::string text = "iteration,loss\n";
    for (const auto& e : log) text += std::to_string(e.iteration) + "," + fmt_double(e.loss) + "\n";
    write_text(path, text);
}

/// `dir/name.json` -> `dir/name<suffix>`.
fs::path sibling(const fs::path& path, const std::string& suffix) {
    fs::path p = path;
    if (p.extension() == ".json") p.replace_extension();
    return fs::path(p.string() + suffix);
}

void write_timing(const fs::path& path, const std::string& key, double seconds) {
    write_text(path, Json{{key, seconds}}.dump(2) + "\n");
}

Json psnr_json(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

nss::TrainResult run_training(const nss::Dataset& ds, const nss::TrainConfig& t) {
    return nss::train(ds, t, [](const nss::TrainLogEntry& e) {
        log_line("iter " + std::to_string(e.iteration) + " loss " + fmt_double(e.loss));
    });
}

// --- subcommands ---------------------------------------------------------------

struct SynthCmd {
    Common common;
    std::string dataset = "dataset";
    std::optional<std::string> scene;
    std::optional<int> views;
    std::optional<int> res;
    std::optional<double> noise;
    std::optional<double> phase;
    std::optional<double> fov;
    std::optional<double> radius;
    std::optional<double> turns;

    void add(CLI::App& root, std::function<void()>& run) {
        CLI::App* app = root.add_subcommand("synth", "Render a synthetic dataset with ground-truth depth");
        add_common(app, common);
        app->add_option("--dataset", dataset, "Output dataset directory")->capture_default_str();
        app->add_option("--scene", scene, "Scene JSON (default: built-in desk scene)");
        app->add_option("--views", views, "Number of views");
        app->add_option("--res", res, "Square image resolution");
        app->add_option("--noise", noise, "Depth noise standard deviation");
        app->add_option("--phase", phase, "Orbit phase in view steps");
        app->add_option("--fov", fov, "Horizontal field of view in degrees");
        app->add_option("--radius", radius, "Orbit radius");
        app->add_option("--turns", turns, "Orbit revolutions");
        app->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        const Config cfg = load_config(common);
        nss::SynthOptions opts;
        opts.seed = global_seed(common, cfg, opts.seed);
        std::optional<std::string> scene_path = scene;
        if (const Json* s = cfg.section("synth")) {
            Json copy = *s;
            if (copy.is_object() && copy.contains("scene")) {
                if (!copy["scene"].is_string()) throw nss::ConfigError("synth.scene: expected a path");
                if (!scene_path) scene_path = copy["scene"].get<std::string>();
                copy.erase("scene");
            }
            nss::read_json(copy, opts, "synth");
        }
        if (common.seed) opts.seed = *common.seed;
        set_if(views, opts.orbit.count);
        set_if(res, opts.resolution);
        set_if(noise, opts.depth_noise_sigma);
        set_if(phase, opts.orbit.phase);
        set_if(fov, opts.fov_deg);
        set_if(radius, opts.orbit.radius);
        set_if(turns, opts.orbit.turns);
        opts.validate();
        nss::SyntheticSceneSpec spec = nss::SyntheticSceneSpec::default_scene();
        if (scene_path) {
            const fs::path p = resolve(common, *scene_path);
            require_file(p, "scene");
            spec = nss::SyntheticSceneSpec::from_json(read_text(p));
        }
        spec.validate();

        const nss::Dataset ds = nss::synthesize_dataset(spec, opts);
        const fs::path dir = resolve(common, dataset);
        nss::save_dataset(ds, dir);
        log_line("wrote " + std::to_string(ds.frames.size()) + " frames to " + dir.string());
    }
};

struct CloudCmd {
    Common common;
    std::string dataset = "dataset";
    std::string ply = "cloud.ply";
    std::optional<double> tau;
    std::optional<int> stride;

    void add(CLI::App& root, std::function<void()>& run) {
        CLI::App* app = root.add_subcommand("cloud", "Build a refined point cloud from depth images");
        add_common(app, common);
        app->add_option("--dataset", dataset, "Input dataset directory")->capture_default_str();
        app->add_option("--ply", ply, "Output PLY file")->capture_default_str();
        app->add_option("--tau", tau, "Redundancy threshold");
        app->add_option("--stride", stride, "Use every stride-th frame");
        app->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        const Config cfg = load_config(common);
        nss::RefineConfig rc;
        if (const Json* s = cfg.section("cloud")) nss::read_json(*s, rc, "cloud");
        set_if(tau, rc.tau);
        set_if(stride, rc.stride);
        rc.validate();
        const fs::path dir = resolve(common, dataset);
        require_dataset(dir, "dataset");

        const nss::Dataset ds = nss::load_dataset(dir);
        nss::RefineTrace trace;
        const nss::PointCloud cloud = nss::generate_refined_cloud(ds, rc, &trace);
        for (std::size_t i = 0; i < trace.frames.size(); ++i)
            log_line("frame " + std::to_string(trace.frames[i]) + ": " + std::to_string(trace.sizes[i]) + " points");
        const fs::path out = resolve(common, ply);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        nss::write_ply(cloud, out);
        log_line("used " + std::to_string(trace.frames.size()) + " frames, wrote " +
                 std::to_string(cloud.points.size()) + " points to " + out.string());
    }
};

struct DepthCmd {
    Common common;
    std::string dataset = "dataset";
    std::string ply = "cloud.ply";
    std::string png = "depth.png";
    int view = 0;
    HoleFlags holes;

    void add(CLI::App& root, std::function<void()>& run) {
        CLI::App* app = root.add_subcommand("depth", "Project a point cloud into a view and fill holes");
        add_common(app, common);
        app->add_option("--dataset", dataset, "Dataset providing the camera")->capture_default_str();
        app->add_option("--ply", ply, "Input PLY file")->capture_default_str();
        app->add_option("--view", view, "Frame index")->required();
        app->add_option("--png", png, "Output 16-bit depth PNG")->capture_default_str();
        holes.add(app);
        app->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        const Config cfg = load_config(common);
        nss::HoleFillConfig hc;
        if (const Json* s = cfg.section("hole_fill")) nss::read_json(*s, hc, "hole_fill");
        holes.apply(hc);
        hc.validate();
        const fs::path dir = resolve(common, dataset);
        const fs::path cloud_path = resolve(common, ply);
        require_dataset(dir, "dataset");
        require_file(cloud_path, "ply");

        const nss::Dataset ds = nss::load_dataset(dir);
        if (view < 0 || static_cast<std::size_t>(view) >= ds.frames.size())
            throw nss::ConfigError("--view: index " + std::to_string(view) + " outside [0, " +
                                   std::to_string(ds.frames.size()) + ")");
        const nss::PointCloud cloud = nss::read_ply(cloud_path);
        nss::ProjectedDepth pd = nss::project_cloud_depth(cloud, ds.intrinsics, ds.frames[view].pose);
        log_line("zero pixels before fill: " + std::to_string(nss::count_zero(pd.depth)));
        if (!holes.no_fill) {
            pd = nss::fill_holes(pd, hc);
            log_line("zero pixels after fill: " + std::to_string(nss::count_zero(pd.depth)));
        }
        const fs::path out = resolve(common, png);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        nss::write_depth_png(pd.depth, ds.depth_scale, out);
    }
};

struct TrainCmd {
    Common common;
    std::string dataset = "dataset";
    std::string checkpoint = "model";
    std::string metrics = "metrics.csv";
    SamplerFlags sampler;
    TrainFlags train;

    void add(CLI::App& root, std::function<void()>& run) {
        CLI::App* app = root.add_subcommand("train", "Train a radiance field");
        add_common(app, common);
        app->add_option("--dataset", dataset, "Training dataset directory")->capture_default_str();
        app->add_option("--checkpoint", checkpoint, "Checkpoint stem (.bin and .json)")->capture_default_str();
        app->add_option("--metrics", metrics, "Loss log CSV")->capture_default_str();
        sampler.add(app);
        train.add(app);
        app->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        const Config cfg = load_config(common);
        const nss::TrainConfig t = train_config(common, cfg, sampler, train);
        const fs::path dir = resolve(common, dataset);
        require_dataset(dir, "dataset");

        const nss::Dataset ds = nss::load_dataset(dir);
        const nss::TrainResult result = run_training(ds, t);
        const fs::path stem = resolve(common, checkpoint);
        if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
        nss::save_checkpoint(result.field, result.steps, result.final_lr, stem);
        write_metrics_csv(resolve(common, metrics), result.log);
        write_timing(sibling(stem, "_timing.json"), "train_seconds", result.seconds);
        log_line("trained " + std::to_string(result.steps) + " steps in " + fmt_double(result.seconds) + " s");
    }
};

/// Report rows plus per-view JSON lines.
struct ReportWriter {
    nss::ExperimentReport report;
    std::string views_jsonl;

    void add(const std::string& id, const std::string& label, const nss::EvalResult& ev) {
        nss::ExperimentRow row{id, label, ev.mean_psnr, {}};
        for (const auto& v : ev.views) {
            row.view_psnr.push_back(v.psnr);
            views_jsonl += Json{{"id", id}, {"view", v.view}, {"psnr", psnr_json(v.psnr)}}.dump() + "\n";
        }
        report.rows.push_back(std::move(row));
        log_line(label + ": mean PSNR " + fmt_double(ev.mean_psnr) + " dB");
    }

    void write(const Common& c, const std::string& report_path, double seconds) {
        const fs::path path = resolve(c, report_path);
        write_text(path, report.to_json());
        write_text(sibling(path, "_views.jsonl"), views_jsonl);
        write_timing(sibling(path, "_timing.json"), "seconds", seconds);
    }
};

struct EvalCmd {
    Common common;
    std::string dataset = "test";
    std::string checkpoint = "model";
    std::string ply = "cloud.ply";
    std::string report = "report.json";
    std::vector<std::string> depth_sources;
    std::optional<std::string> renders;
    SamplerFlags sampler;
    HoleFlags holes;

    void add(CLI::App& root, std::function<void()>& run) {
        CLI::App* app = root.add_subcommand("eval", "Score a checkpoint on test views");
        add_common(app, common);
        app->add_option("--dataset", dataset, "Test dataset directory")->capture_default_str();
        app->add_option("--checkpoint", checkpoint, "Checkpoint stem")->capture_default_str();
        app->add_option("--ply", ply, "Point cloud for estimated depth")->capture_default_str();
        app->add_option("--report", report, "Report JSON")->capture_default_str();
        app->add_option("--depth-source", depth_sources, "gt and/or cloud (comma separated)")->delimiter(',');
        app->add_option("--renders", renders, "Directory for rendered PNGs");
        sampler.add(app);
        holes.add(app);
        app->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        const auto start = std::chrono::steady_clock::now();
        const Config cfg = load_config(common);
        std::vector<nss::EvalConfig> configs;
        if (depth_sources.empty()) configs.push_back(eval_config(common, cfg, sampler, holes, std::nullopt));
        for (const auto& s : depth_sources) configs.push_back(eval_config(common, cfg, sampler, holes, s));
        const fs::path dir = resolve(common, dataset);
        const fs::path stem = resolve(common, checkpoint);
        require_dataset(dir, "dataset");
        require_checkpoint(stem);
        const bool need_cloud = std::any_of(configs.begin(), configs.end(), [](const nss::EvalConfig& e) {
            return e.sampler.kind == nss::SamplerKind::near_surface && e.depth_source == nss::DepthSource::cloud;
        });
        if (need_cloud) require_file(resolve(common, ply), "ply");

        const nss::Dataset test = nss::load_dataset(dir);
        const nss::Checkpoint ck = nss::load_checkpoint(stem);
        std::optional<nss::PointCloud> cloud;
        if (need_cloud) cloud = nss::read_ply(resolve(common, ply));
        ReportWriter writer;
        Json hashed = Json::array();
        for (const auto& e : configs) {
            const std::string id = nss::to_string(e.depth_source);
            const nss::EvalResult ev = nss::evaluate(ck.field, test, cloud ? &*cloud : nullptr, e);
            writer.add(id, "depth_source=" + id, ev);
            hashed.push_back(nss::to_json(e));
            if (renders)
                for (const auto& v : ev.views) {
                    char name[32];
                    std::snprintf(name, sizeof name, "%s_%04zu.png", id.c_str(), v.view);
                    const fs::path p = resolve(common, *renders) / name;
                    fs::create_directories(p.parent_path());
                    nss::write_color_png(v.rendered, p);
                }
        }
        writer.report.config_hash = nss::fnv1a_hex(hashed.dump());
        writer.write(common, report,
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
};

struct SweepCmd {
    Common common;
    std::string train_dataset = "train";
    std::string test_dataset = "test";
    std::string ply = "cloud.ply";
    std::string report = "report.json";
    std::string prefix = "sweep";
    std::string axis;
    std::vector<std::string> values;
    std::optional<std::string> depth_source;
    SamplerFlags sampler;
    TrainFlags train;
    HoleFlags holes;

    void add(CLI::App& root, std::function<void()>& run) {
        CLI::App* app = root.add_subcommand("sweep", "Train and evaluate one run per value of a sampler setting");
        add_common(app, common);
        app->add_option("--train-dataset", train_dataset, "Training dataset directory")->capture_default_str();
        app->add_option("--test-dataset", test_dataset, "Test dataset directory")->capture_default_str();
        app->add_option("--ply", ply, "Point cloud for estimated depth")->capture_default_str();
        app->add_option("--report", report, "Report JSON")->capture_default_str();
        app->add_option("--prefix", prefix, "Directory for per-run checkpoints and loss logs")->capture_default_str();
        app->add_option("--axis", axis, "alpha | n_samples | range_scale | sampler")->required();
        app->add_option("--values", values, "Comma-separated values")->delimiter(',')->required();
        app->add_option("--depth-source", depth_source, "gt or cloud");
        sampler.add(app);
        train.add(app);
        holes.add(app);
        app->callback([this, &run] { run = [this] { exec(); }; });
    }

    static void set_axis(const std::string& axis, const std::string& value, nss::SamplerConfig& s) {
        try {
            std::size_t used = 0;
            if (axis == "sampler") {
                s.kind = nss::parse_sampler(value);
                return;
            }
            if (axis == "n_samples") {
                s.n_samples = std::stoi(value, &used);
            } else {
                const double v = std::stod(value, &used);
                if (axis == "alpha") s.alpha = v;
                else if (axis == "range_scale") s.range_scale = v;
                else throw nss::ConfigError("--axis: expected alpha, n_samples, range_scale, or sampler");
            }
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::logic_error&) {
            throw nss::ConfigError("--values: cannot parse '" + value + "' for axis " + axis);
        }
    }

    void exec() {
        const auto start = std::chrono::steady_clock::now();
        const Config cfg = load_config(common);
        const nss::TrainConfig base = train_config(common, cfg, sampler, train);
        nss::EvalConfig eval_base = eval_config(common, cfg, sampler, holes, depth_source);
        std::vector<nss::TrainConfig> runs;
        for (const auto& v : values) {
            nss::TrainConfig t = base;
            set_axis(axis, v, t.sampler);
            t.validate();
            runs.push_back(t);
        }
        const fs::path train_dir = resolve(common, train_dataset);
        const fs::path test_dir = resolve(common, test_dataset);
        require_dataset(train_dir, "train dataset");
        require_dataset(test_dir, "test dataset");
        const bool need_cloud = eval_base.depth_source == nss::DepthSource::cloud &&
                                std::any_of(runs.begin(), runs.end(), [](const nss::TrainConfig& t) {
                                    return t.sampler.kind == nss::SamplerKind::near_surface;
                                });
        if (need_cloud) require_file(resolve(common, ply), "ply");

        const nss::Dataset train_ds = nss::load_dataset(train_dir);
        const nss::Dataset test_ds = nss::load_dataset(test_dir);
        std::optional<nss::PointCloud> cloud;
        if (need_cloud) cloud = nss::read_ply(resolve(common, ply));
        ReportWriter writer;
        Json hashed = {{"axis", axis}, {"values", values}, {"train", nss::to_json(base)},
                       {"eval", nss::to_json(eval_base)}};
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const std::string id = axis + "=" + values[i];
            log_line("run " + id);
            const nss::TrainResult result = run_training(train_ds, runs[i]);
            const fs::path stem = resolve(common, prefix) / ("run" + std::to_string(i));
            fs::create_directories(stem.parent_path());
            nss::save_checkpoint(result.field, result.steps, result.final_lr, stem);
            write_metrics_csv(fs::path(stem.string() + "_metrics.csv"), result.log);
            nss::EvalConfig e = eval_base;
            e.sampler = runs[i].sampler;
            e.render = runs[i].render;
            writer.add(id, id, nss::evaluate(result.field, test_ds, cloud ? &*cloud : nullptr, e));
        }
        writer.report.config_hash = nss::fnv1a_hex(hashed.dump());
        writer.write(common, report,
                     std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
};

struct RenderCmd {
    Common common;
    std::string dataset = "test";
    std::string checkpoint = "model";
    std::string ply = "cloud.ply";
    std::string dir_out = "renders";
    std::optional<int> view;
    std::optional<std::string> depth_source;
    SamplerFlags sampler;
    HoleFlags holes;

    void add(CLI::App& root, std::function<void()>& run) {
        CLI::App* app = root.add_subcommand("render", "Render views of a checkpoint to PNG");
        add_common(app, common);
        app->add_option("--dataset", dataset, "Dataset providing cameras")->capture_default_str();
        app->add_option("--checkpoint", checkpoint, "Checkpoint stem")->capture_default_str();
        app->add_option("--ply", ply, "Point cloud for estimated depth")->capture_default_str();
        app->add_option("--renders", dir_out, "Output directory")->capture_default_str();
        app->add_option("--view", view, "Single frame index (default: all)");
        app->add_option("--depth-source", depth_source, "gt or cloud");
        sampler.add(app);
        holes.add(app);
        app->callback([this, &run] { run = [this] { exec(); }; });
    }

    void exec() {
        const Config cfg = load_config(common);
        const nss::EvalConfig e = eval_config(common, cfg, sampler, holes, depth_source);
        const fs::path dir = resolve(common, dataset);
        const fs::path stem = resolve(common, checkpoint);
        require_dataset(dir, "dataset");
        require_checkpoint(stem);
        const bool need_cloud =
            e.sampler.kind == nss::SamplerKind::near_surface && e.depth_source == nss::DepthSource::cloud;
        if (need_cloud) require_file(resolve(common, ply), "ply");

        nss::Dataset ds = nss::load_dataset(dir);
        std::size_t first = 0;
        if (view) {
            if (*view < 0 || static_cast<std::size_t>(*view) >= ds.frames.size())
                throw nss::ConfigError("--view: index " + std::to_string(*view) + " outside [0, " +
                                       std::to_string(ds.frames.size()) + ")");
            first = static_cast<std::size_t>(*view);
            ds.frames = {ds.frames[first]};
        }
        const nss::Checkpoint ck = nss::load_checkpoint(stem);
        std::optional<nss::PointCloud> cloud;
        if (need_cloud) cloud = nss::read_ply(resolve(common, ply));
        const nss::EvalResult ev = nss::evaluate(ck.field, ds, cloud ? &*cloud : nullptr, e);
        const fs::path out = resolve(common, dir_out);
        fs::create_directories(out);
        std::string lines;
        for (const auto& v : ev.views) {
            char name[32];
            std::snprintf(name, sizeof name, "%04zu.png", first + v.view);
            nss::write_color_png(v.rendered, out / name);
            lines += Json{{"view", first + v.view}, {"psnr", psnr_json(v.psnr)}}.dump() + "\n";
        }
        write_text(out / "metrics.jsonl", lines);
        log_line("rendered " + std::to_string(ev.views.size()) + " views to " + out.string());
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Near-surface sampling radiance fields"};
    app.require_subcommand(1);
    std::function<void()> run;
    SynthCmd synth;
    CloudCmd cloud;
    DepthCmd depth;
    TrainCmd train;
    EvalCmd eval;
    SweepCmd sweep;
    RenderCmd render;
    synth.add(app, run);
    cloud.add(app, run);
    depth.add(app, run);
    train.add(app, run);
    eval.add(app, run);
    sweep.add(app, run);
    render.add(app, run);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        run();
    } catch (const nss::ConfigError& e) {
        log_line(std::string("config error: ") + e.what());
        return 2;
    } catch (const nss::DataError& e) {
        log_line(std::string("data error: ") + e.what());
        return 3;
    } catch (const nss::NumericError& e) {
        log_line(std::string("numeric error: ") + e.what());
        return 4;
    } catch (const fs::filesystem_error& e) {
        log_line(std::string("data error: ") + e.what());
        return 3;
    } catch (const std::exception& e) {
        log_line(std::string("error: ") + e.what());
        return 1;
    }
    return 0;
}
