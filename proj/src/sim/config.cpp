// Copyright 2026 The Harvest Sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "harvest/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace harvest {

namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key " + where + "." + key);
  }
}

double number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

bool boolean(const json& obj, const char* key, bool fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(where + "." + key + " must be true or false");
  return v.get<bool>();
}

int integer(const json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return v.get<int>();
}

std::string text(const json& obj, const char* key, const std::string& fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

CartesianPoint point(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
    throw ConfigError(where + " must be [x, y, z]");
  }
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

ArmParams arm_from(const json& obj, const ArmParams& base, const std::string& where) {
  static const std::set<std::string> keys{"x0", "y0", "z0", "x1", "y1", "z1", "x2", "d_min", "d_max",
                                          "theta_min_deg", "theta_max_deg", "phi_min_deg", "phi_max_deg"};
  only_keys(obj, keys, where);
  ArmParams p = ArmParams::from_degrees(
      number(obj, "x0", base.x0, where), number(obj, "y0", base.y0, where), number(obj, "z0", base.z0, where),
      number(obj, "x1", base.x1, where), number(obj, "y1", base.y1, where), number(obj, "z1", base.z1, where),
      number(obj, "x2", base.x2, where), number(obj, "d_min", base.d_min, where),
      number(obj, "d_max", base.d_max, where), number(obj, "theta_min_deg", rad_to_deg(base.theta_min), where),
      number(obj, "theta_max_deg", rad_to_deg(base.theta_max), where),
      number(obj, "phi_min_deg", rad_to_deg(base.phi_min), where),
      number(obj, "phi_max_deg", rad_to_deg(base.phi_max), where));
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return p;
}

AppleSpec apple_from(const json& obj, const std::string& where) {
  only_keys(obj, {"station", "position", "radius", "stem_force", "occlusion", "leaf_obstruction", "clustered", "glare"},
            where);
  if (!obj.contains("position")) throw ConfigError(where + ".position is required");
  AppleSpec a;
  a.station = integer(obj, "station", a.station, where);
  a.position = point(obj.at("position"), where + ".position");
  a.radius = number(obj, "radius", a.radius, where);
  a.stem_force = number(obj, "stem_force", a.stem_force, where);
  a.occlusion = number(obj, "occlusion", a.occlusion, where);
  a.leaf_obstruction = boolean(obj, "leaf_obstruction", a.leaf_obstruction, where);
  a.clustered = boolean(obj, "clustered", a.clustered, where);
  a.glare = boolean(obj, "glare", a.glare, where);
  return a;
}

TimingMode timing_from(const std::string& s) {
  if (s == "fixed") return TimingMode::Fixed;
  if (s == "kinematic") return TimingMode::Kinematic;
  if (s == "random") return TimingMode::Random;
  throw ConfigError("scenario.timing must be fixed, kinematic or random");
}

FailureMode failure_mode_from(const std::string& s) {
  if (s == "none") return FailureMode::None;
  if (s == "field") return FailureMode::Field;
  if (s == "uniform") return FailureMode::Uniform;
  throw ConfigError("scenario.failures.mode must be none, field or uniform");
}

json apply_overrides(json doc, const ConfigOverrides& o) {
  if (!doc.contains("scenario")) doc["scenario"] = json::object();
  json& sc = doc["scenario"];
  if (o.seed) sc["seed"] = *o.seed;
  if (o.strategy) sc["strategy"] = to_string(*o.strategy);
  if (o.failure_p) {
    sc["failures"]["mode"] = "uniform";
    sc["failures"]["p"] = *o.failure_p;
  }
  return doc;
}

Scenario build_from(const json& doc) {
  only_keys(doc, {"arms", "scenario"}, "config");
  const json empty = json::object();
  const json& sj = doc.contains("scenario") ? doc.at("scenario") : empty;
  const std::string w = "scenario";
  only_keys(sj,
            {"seed", "strategy", "preset", "stations", "apples_per_station", "apple_count", "apples", "durations",
             "timing", "speed_fraction", "failures", "perception", "tracking", "platform", "max_attempts", "tick",
             "liveness_horizon", "attach_timeout", "corridor_clearance"},
            w);

  std::uint64_t seed = 1;
  if (sj.contains("seed")) {
    if (!sj.at("seed").is_number_unsigned()) throw ConfigError("scenario.seed must be a non-negative integer");
    seed = sj.at("seed").get<std::uint64_t>();
  }
  const std::string strategy_name = text(sj, "strategy", "v2024", w);
  const auto strategy = strategy_from_string(strategy_name);
  if (!strategy) throw ConfigError("scenario.strategy must be baseline, v2023, v2024 or single_arm");

  const std::string preset = text(sj, "preset", "", w);
  Scenario s;
  if (preset == "calibration") {
    s = calibration_scenario(*strategy, seed, integer(sj, "stations", 30, w), integer(sj, "apples_per_station", 12, w));
  } else if (preset == "ideal") {
    s = ideal_scenario(*strategy, seed, integer(sj, "apple_count", 20, w));
  } else if (preset.empty()) {
    s.seed = seed;
    s.strategy = *strategy;
  } else {
    throw ConfigError("scenario.preset must be calibration or ideal");
  }

  if (doc.contains("arms")) {
    const json& arms = doc.at("arms");
    only_keys(arms, {"arm1", "arm2"}, "arms");
    if (arms.contains("arm1")) s.arm1 = arm_from(arms.at("arm1"), s.arm1, "arms.arm1");
    if (arms.contains("arm2")) s.arm2 = arm_from(arms.at("arm2"), s.arm2, "arms.arm2");
  }
  if (sj.contains("apples")) {
    const json& list = sj.at("apples");
    if (!list.is_array()) throw ConfigError("scenario.apples must be a list");
    s.apples.clear();
    for (std::size_t k = 0; k < list.size(); ++k) {
      s.apples.push_back(apple_from(list[k], "scenario.apples[" + std::to_string(k) + "]"));
    }
  }
  if (sj.contains("durations")) {
    const json& d = sj.at("durations");
    only_keys(d, {"m", "a", "r"}, "scenario.durations");
    s.durations.m = number(d, "m", s.durations.m, "scenario.durations");
    s.durations.a = number(d, "a", s.durations.a, "scenario.durations");
    s.durations.r = number(d, "r", s.durations.r, "scenario.durations");
  }
  if (sj.contains("timing")) s.timing = timing_from(text(sj, "timing", "", w));
  s.speed_fraction = number(sj, "speed_fraction", s.speed_fraction, w);
  if (sj.contains("failures")) {
    const json& f = sj.at("failures");
    const std::string fw = "scenario.failures";
    only_keys(f, {"mode", "p", "interference_probability", "miss_exponent"}, fw);
    if (f.contains("mode")) s.failures.mode = failure_mode_from(text(f, "mode", "", fw));
    s.failures.p = number(f, "p", s.failures.p, fw);
    s.failures.interference_probability = number(f, "interference_probability", s.failures.interference_probability, fw);
    s.failures.miss_exponent = number(f, "miss_exponent", s.failures.miss_exponent, fw);
  }
  s.perception = boolean(sj, "perception", s.perception, w);
  s.tracking = boolean(sj, "tracking", s.tracking, w);
  if (sj.contains("platform")) {
    const json& p = sj.at("platform");
    only_keys(p, {"dx", "dz"}, "scenario.platform");
    s.platform.dx = number(p, "dx", s.platform.dx, "scenario.platform");
    s.platform.dz = number(p, "dz", s.platform.dz, "scenario.platform");
  }
  s.max_attempts = integer(sj, "max_attempts", s.max_attempts, w);
  s.tick = number(sj, "tick", s.tick, w);
  s.liveness_horizon = number(sj, "liveness_horizon", s.liveness_horizon, w);
  s.attach_timeout = number(sj, "attach_timeout", s.attach_timeout, w);
  s.corridor_clearance = number(sj, "corridor_clearance", s.corridor_clearance, w);
  try {
    s.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  return s;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

ScenarioConfig ScenarioConfig::parse(const std::string& text) {
  const json doc = parse_json(text);
  build_from(doc);
  ScenarioConfig c;
  c.canonical_ = doc.dump();
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Scenario ScenarioConfig::build(const ConfigOverrides& overrides) const {
  return build_from(apply_overrides(json::parse(canonical_), overrides));
}

std::uint64_t ScenarioConfig::hash(const ConfigOverrides& overrides) const {
  json doc = apply_overrides(json::parse(canonical_), overrides);
  doc["scenario"].erase("seed");
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace harvest
