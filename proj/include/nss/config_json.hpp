#pragma once

// JSON round trip for the configuration structs. Readers start from the
// target's current values, override the keys present, and throw ConfigError
// naming the full key path on unknown keys or wrong types.

#include "nss/depthmap.hpp"
#include "nss/field.hpp"
#include "nss/pointcloud.hpp"
#include "nss/render.hpp"
#include "nss/synthetic.hpp"
#include "nss/trainer.hpp"

#include <json.hpp>

#include <string>

namespace nss {

using Json = nlohmann::json;

Json to_json(const FieldConfig& c);
Json to_json(const SamplerConfig& c);
Json to_json(const RenderConfig& c);
Json to_json(const TrainConfig& c);
Json to_json(const EvalConfig& c);
Json to_json(const RefineConfig& c);
Json to_json(const HoleFillConfig& c);
Json to_json(const SynthOptions& c);

void read_json(const Json& j, FieldConfig& c, const std::string& path = "field");
void read_json(const Json& j, SamplerConfig& c, const std::string& path = "sampler");
void read_json(const Json& j, RenderConfig& c, const std::string& path = "render");
void read_json(const Json& j, TrainConfig& c, const std::string& path = "train");
void read_json(const Json& j, EvalConfig& c, const std::string& path = "eval");
void read_json(const Json& j, RefineConfig& c, const std::string& path = "cloud");
void read_json(const Json& j, HoleFillConfig& c, const std::string& path = "hole_fill");
void read_json(const Json& j, SynthOptions& c, const std::string& path = "synth");

/// Parses text, throwing ConfigError (with `what` as context) on malformed JSON.
Json parse_config_text(const std::string& text, const std::string& what);

}  // namespace nss
